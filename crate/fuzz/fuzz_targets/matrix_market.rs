#![no_main]

use libfuzzer_sys::fuzz_target;
use tracefem::linalg::CsrMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(m) = CsrMatrix::read_matrix_market(data) else {
        return;
    };
    assert_eq!(m.row_ptr().len(), m.nrows() + 1);
    for i in 0..m.nrows() {
        let cols: Vec<usize> = m.row(i).map(|(j, _)| j).collect();
        assert!(cols.windows(2).all(|w| w[0] < w[1]), "sorted unique columns");
        assert!(cols.iter().all(|&j| j < m.ncols()));
    }
    // Summed duplicates may overflow; only finite matrices can be written back.
    if m.values().iter().all(|v| v.is_finite()) {
        let mut out = Vec::new();
        m.write_matrix_market(&mut out).unwrap();
        let back = CsrMatrix::read_matrix_market(out.as_slice()).expect("written matrices parse");
        assert_eq!(back, m);
    }
});
