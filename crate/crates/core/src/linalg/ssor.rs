//! Symmetric successive over-relaxation, pointwise or in fixed-size diagonal blocks.

use nalgebra::DMatrix;

use super::sparse::CsrMatrix;

/// `M = (D + ωL) D⁻¹ (D + ωU) / (ω(2 − ω))`, with `D` the (block) diagonal of the matrix.
///
/// With `block = 3` and interleaved vector unknowns every node's 3×3 coupling is inverted
/// exactly, so the sweep commutes with nodewise linear maps that commute with the blocks.
#[derive(Debug, Clone)]
pub struct Ssor<'a> {
    matrix: &'a CsrMatrix,
    omega: f64,
    block: usize,
    /// Row-major inverses of the diagonal blocks.
    diag_inv: Vec<f64>,
}

impl<'a> Ssor<'a> {
    pub fn new(matrix: &'a CsrMatrix, omega: f64, block: usize) -> Self {
        assert!(omega > 0.0 && omega < 2.0, "SSOR relaxation must lie in (0, 2)");
        assert!(block >= 1 && matrix.nrows() % block == 0);
        let nblocks = matrix.nrows() / block;
        let mut diag_inv = Vec::with_capacity(nblocks * block * block);
        for ib in 0..nblocks {
            let mut d = DMatrix::zeros(block, block);
            for r in 0..block {
                let i = ib * block + r;
                for (j, v) in matrix.row(i) {
                    if j / block == ib {
                        d[(r, j - ib * block)] = v;
                    }
                }
            }
            let inv = d.try_inverse().expect("singular diagonal block in SSOR");
            for r in 0..block {
                for c in 0..block {
                    diag_inv.push(inv[(r, c)]);
                }
            }
        }
        Self {
            matrix,
            omega,
            block,
            diag_inv,
        }
    }

    /// Symmetric Gauss–Seidel (`ω = 1`).
    pub fn gauss_seidel(matrix: &'a CsrMatrix, block: usize) -> Self {
        Self::new(matrix, 1.0, block)
    }

    fn solve_block(&self, ib: usize, rhs: &[f64], out: &mut [f64]) {
        let b = self.block;
        let inv = &self.diag_inv[ib * b * b..(ib + 1) * b * b];
        for r in 0..b {
            out[r] = (0..b).map(|c| inv[r * b + c] * rhs[c]).sum();
        }
    }

    /// `z = M⁻¹ r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let b = self.block;
        let nblocks = self.matrix.nrows() / b;
        let w = self.omega;
        let mut rhs = vec![0.0; b];
        let mut tmp = vec![0.0; b];
        // forward: (D + ωL) y = r, stored in z
        for ib in 0..nblocks {
            for rr in 0..b {
                let i = ib * b + rr;
                let mut s = r[i];
                for (j, v) in self.matrix.row(i) {
                    if j / b < ib {
                        s -= w * v * z[j];
                    }
                }
                rhs[rr] = s;
            }
            self.solve_block(ib, &rhs, &mut tmp);
            z[ib * b..(ib + 1) * b].copy_from_slice(&tmp);
        }
        // y ← D y
        let dy: Vec<f64> = (0..nblocks)
            .flat_map(|ib| {
                let rows: Vec<f64> = (0..b)
                    .map(|rr| {
                        let i = ib * b + rr;
                        self.matrix
                            .row(i)
                            .filter(|(j, _)| j / b == ib)
                            .map(|(j, v)| v * z[j])
                            .sum()
                    })
                    .collect();
                rows
            })
            .collect();
        // backward: (D + ωU) z = D y
        for ib in (0..nblocks).rev() {
            for rr in 0..b {
                let i = ib * b + rr;
                let mut s = dy[i];
                for (j, v) in self.matrix.row(i) {
                    if j / b > ib {
                        s -= w * v * z[j];
                    }
                }
                rhs[rr] = s;
            }
            self.solve_block(ib, &rhs, &mut tmp);
            z[ib * b..(ib + 1) * b].copy_from_slice(&tmp);
        }
        let scale = w * (2.0 - w);
        if scale != 1.0 {
            z.iter_mut().for_each(|v| *v *= scale);
        }
    }
}
