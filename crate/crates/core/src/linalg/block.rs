//! Saddle point operator and its block-diagonal preconditioner.

use super::krylov::{pcg, LinearOperator, Preconditioner};
use super::sparse::CsrMatrix;
use super::ssor::Ssor;

/// `[[A, Bᵀ], [B, 0]]` applied without forming the block matrix.
#[derive(Debug, Clone, Copy)]
pub struct SaddleOperator<'a> {
    pub a: &'a CsrMatrix,
    pub b: &'a CsrMatrix,
}

impl<'a> SaddleOperator<'a> {
    pub fn new(a: &'a CsrMatrix, b: &'a CsrMatrix) -> Self {
        assert_eq!(a.nrows(), b.ncols());
        Self { a, b }
    }

    pub fn velocity_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn multiplier_dim(&self) -> usize {
        self.b.nrows()
    }
}

impl LinearOperator for SaddleOperator<'_> {
    fn dim(&self) -> usize {
        self.a.nrows() + self.b.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.a.nrows();
        let (xu, xl) = x.split_at(n);
        let (yu, yl) = y.split_at_mut(n);
        self.a.mul_vec(xu, yu);
        self.b.mul_transpose_add(xl, yu);
        self.b.mul_vec(xu, yl);
    }
}

/// Iteration counters of the inner solves, reset per outer solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InnerCounters {
    pub applications: usize,
    pub a_iterations: usize,
    pub s_iterations: usize,
}

impl InnerCounters {
    pub fn average_a(&self) -> f64 {
        if self.applications == 0 {
            0.0
        } else {
            self.a_iterations as f64 / self.applications as f64
        }
    }

    pub fn average_s(&self) -> f64 {
        if self.applications == 0 {
            0.0
        } else {
            self.s_iterations as f64 / self.applications as f64
        }
    }
}

/// `Q = diag(Q_A, Q_S)`, each block applied by an SSOR-preconditioned CG solve
/// reducing the residual by `inner_rtol`.
pub struct BlockPreconditioner<'a> {
    a: &'a CsrMatrix,
    s: &'a CsrMatrix,
    ssor_a: Ssor<'a>,
    ssor_s: Ssor<'a>,
    pub inner_rtol: f64,
    pub inner_maxit: usize,
    pub counters: InnerCounters,
}

impl<'a> BlockPreconditioner<'a> {
    /// `a_block` is the SSOR block size for the velocity matrix (3 for interleaved nodal blocks).
    pub fn new(a: &'a CsrMatrix, s: &'a CsrMatrix, a_block: usize, inner_rtol: f64) -> Self {
        Self {
            a,
            s,
            ssor_a: Ssor::gauss_seidel(a, a_block),
            ssor_s: Ssor::gauss_seidel(s, 1),
            inner_rtol,
            inner_maxit: 10 * (a.nrows() + s.nrows()).max(100),
            counters: InnerCounters::default(),
        }
    }

    pub fn reset(&mut self) {
        self.counters = InnerCounters::default();
    }
}

impl Preconditioner for BlockPreconditioner<'_> {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let n = self.a.nrows();
        let (ru, rl) = r.split_at(n);
        let (zu, zl) = z.split_at_mut(n);
        zu.fill(0.0);
        zl.fill(0.0);
        let out_a = pcg(self.a, ru, zu, &mut self.ssor_a, self.inner_rtol, self.inner_maxit);
        let out_s = pcg(self.s, rl, zl, &mut self.ssor_s, self.inner_rtol, self.inner_maxit);
        self.counters.applications += 1;
        self.counters.a_iterations += out_a.iterations;
        self.counters.s_iterations += out_s.iterations;
    }
}
