#![no_main]

use libfuzzer_sys::fuzz_target;
use tracefem::io::DatTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = DatTable::parse(text) else {
        return;
    };
    assert!(table.rows.iter().all(|r| r.len() == table.columns.len()));
    // Writing is a fixed point after one round.
    let once = table.to_text();
    let again = DatTable::parse(&once).expect("written tables parse").to_text();
    assert_eq!(once, again);
});
