//! Eigenvalue diagnostics: dense symmetric solvers and Lanczos extreme-eigenvalue estimates.

use nalgebra::{DMatrix, SymmetricEigen};

use super::block::SaddleOperator;
use super::krylov::{dot, pcg, LinearOperator};
use super::sparse::CsrMatrix;
use super::ssor::Ssor;
use crate::{Error, Result};

/// Largest system handled by dense eigensolvers; Lanczos takes over above.
pub const DENSE_LIMIT: usize = 2000;
/// Largest velocity block that [`schur_spectrum`] factorizes densely.
pub const SCHUR_LIMIT: usize = 6000;
/// Relative residual below which a dominant Ritz pair counts as converged.
pub const LANCZOS_TOL: f64 = 1e-6;
/// Lanczos steps used for extreme eigenvalue estimates.
pub const LANCZOS_STEPS: usize = 200;

/// Sorted eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sorted eigenvalues of the pencil `A x = ξ M x` with `M` symmetric positive definite.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let y = l
        .solve_lower_triangular(a)
        .ok_or(Error::NotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::NotPositiveDefinite)?;
    let c = (&c + c.transpose()) * 0.5;
    Ok(symmetric_eigenvalues(c))
}

/// Result of a Lanczos run.
#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    /// Ritz values, sorted.
    pub ritz: Vec<f64>,
    /// Residual bounds `|β_k s_k|` of the extreme Ritz pairs (lowest, highest).
    pub residuals: (f64, f64),
    pub steps: usize,
}

impl LanczosOutcome {
    pub fn min(&self) -> f64 {
        self.ritz[0]
    }

    pub fn max(&self) -> f64 {
        *self.ritz.last().unwrap()
    }

    /// Ritz value of largest magnitude and its residual bound.
    pub fn dominant(&self) -> (f64, f64) {
        if self.min().abs() > self.max().abs() {
            (self.min(), self.residuals.0)
        } else {
            (self.max(), self.residuals.1)
        }
    }

    /// Whether both extreme Ritz pairs have residual below `tol` relative to the spectral scale.
    pub fn converged(&self, tol: f64) -> bool {
        let scale = self.min().abs().max(self.max().abs());
        self.residuals.0 <= tol * scale && self.residuals.1 <= tol * scale
    }
}

/// Lanczos with full reorthogonalization for an operator self-adjoint in the inner
/// product `⟨x, y⟩_M = xᵀ M y`.
///
/// `op` applies the operator, `mass` applies `M` (use the identity for the Euclidean case).
pub fn lanczos(
    op: &mut dyn FnMut(&[f64], &mut [f64]),
    mass: &mut dyn FnMut(&[f64], &mut [f64]),
    start: &[f64],
    max_steps: usize,
) -> Result<LanczosOutcome> {
    let n = start.len();
    let steps = max_steps.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut mbasis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);

    let mut v = start.to_vec();
    let mut mv = vec![0.0; n];
    mass(&v, &mut mv);
    let nrm = dot(&v, &mv);
    if !(nrm > 0.0) {
        return Err(Error::Dimension("Lanczos start vector has zero M-norm".into()));
    }
    let s = 1.0 / nrm.sqrt();
    v.iter_mut().for_each(|x| *x *= s);
    mv.iter_mut().for_each(|x| *x *= s);

    let mut w = vec![0.0; n];
    let mut mw = vec![0.0; n];
    for _ in 0..steps {
        op(&v, &mut w);
        let alpha = dot(&w, &mv);
        basis.push(v.clone());
        mbasis.push(mv.clone());
        alphas.push(alpha);
        // two passes of classical Gram-Schmidt against all previous vectors
        for _ in 0..2 {
            for (q, mq) in basis.iter().zip(&mbasis) {
                let c = dot(&w, mq);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        mass(&w, &mut mw);
        let beta_sq = dot(&w, &mw);
        let beta = beta_sq.max(0.0).sqrt();
        let scale = alphas.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        if beta <= 1e-14 * scale.max(f64::MIN_POSITIVE) || basis.len() == steps {
            betas.push(beta);
            break;
        }
        betas.push(beta);
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / beta);
        mv.iter_mut().zip(&mw).for_each(|(vi, wi)| *vi = wi / beta);
    }

    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let last_beta = betas[k - 1];
    let res = |idx: usize| (last_beta * eig.eigenvectors[(k - 1, idx)]).abs();
    Ok(LanczosOutcome {
        ritz: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        residuals: (res(order[0]), res(order[k - 1])),
        steps: k,
    })
}

/// Extreme magnitudes and the resulting spectral condition number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub min_abs: f64,
    pub max_abs: f64,
    pub cond: f64,
    /// False when a Lanczos estimate did not meet its residual tolerance; the numbers
    /// are then bounds (`min_abs` from above, `max_abs` from below) rather than values.
    pub converged: bool,
}

impl ConditionEstimate {
    pub fn from_eigenvalues(ev: &[f64]) -> Self {
        let min_abs = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let max_abs = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Self {
            min_abs,
            max_abs,
            cond: max_abs / min_abs,
            converged: true,
        }
    }
}

/// Which block-diagonal matrix the saddle point operator is preconditioned with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionMode {
    None,
    /// `Q = diag(M_u, M_λ)`.
    MassBlock,
}

fn block_dense(top: &CsrMatrix, bottom: &CsrMatrix) -> DMatrix<f64> {
    let (n, m) = (top.nrows(), bottom.nrows());
    let mut d = DMatrix::zeros(n + m, n + m);
    d.view_mut((0, 0), (n, n)).copy_from(&top.to_dense());
    d.view_mut((n, n), (m, m)).copy_from(&bottom.to_dense());
    d
}

fn saddle_dense(op: &SaddleOperator) -> DMatrix<f64> {
    let n = op.a.nrows();
    let m = op.b.nrows();
    let mut d = DMatrix::zeros(n + m, n + m);
    d.view_mut((0, 0), (n, n)).copy_from(&op.a.to_dense());
    let b = op.b.to_dense();
    d.view_mut((n, 0), (m, n)).copy_from(&b);
    d.view_mut((0, n), (n, m)).copy_from(&b.transpose());
    d
}

// deterministic, sign-varying start vector
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).sin()).collect()
}

/// Spectral condition number of `[[A, Bᵀ], [B, 0]]`, or of `Q⁻¹` times it.
///
/// Dense generalized eigenvalues up to [`DENSE_LIMIT`] unknowns. Above, Lanczos in the
/// `Q` inner product estimates the largest magnitude from `Q⁻¹𝒜` and the smallest from
/// `𝒜⁻¹Q`, the latter through one dense LU factorization.
pub fn estimate_condition(
    op: &SaddleOperator,
    mode: PreconditionMode,
    mass_u: &CsrMatrix,
    mass_lambda: &CsrMatrix,
) -> Result<ConditionEstimate> {
    let dim = op.dim();
    if dim <= DENSE_LIMIT {
        let k = saddle_dense(op);
        let ev = match mode {
            PreconditionMode::None => symmetric_eigenvalues(k),
            PreconditionMode::MassBlock => generalized_eigenvalues(&k, &block_dense(mass_u, mass_lambda))?,
        };
        return Ok(ConditionEstimate::from_eigenvalues(&ev));
    }
    let n = op.a.nrows();
    let mut mass = |x: &[f64], y: &mut [f64]| match mode {
        PreconditionMode::None => y.copy_from_slice(x),
        PreconditionMode::MassBlock => {
            mass_u.mul_vec(&x[..n], &mut y[..n]);
            mass_lambda.mul_vec(&x[n..], &mut y[n..]);
        }
    };
    let mut ssor_u = Ssor::gauss_seidel(mass_u, 1);
    let mut ssor_l = Ssor::gauss_seidel(mass_lambda, 1);
    let mut tmp = vec![0.0; dim];
    let mut forward = |x: &[f64], y: &mut [f64]| {
        op.apply(x, &mut tmp);
        match mode {
            PreconditionMode::None => y.copy_from_slice(&tmp),
            PreconditionMode::MassBlock => {
                y.fill(0.0);
                pcg(mass_u, &tmp[..n], &mut y[..n], &mut ssor_u, 1e-13, 10_000);
                pcg(mass_lambda, &tmp[n..], &mut y[n..], &mut ssor_l, 1e-13, 10_000);
            }
        }
    };
    let start = start_vector(dim);
    let high = lanczos(&mut forward, &mut mass, &start, LANCZOS_STEPS)?;

    let lu = saddle_dense(op).lu();
    let mut mx = vec![0.0; dim];
    let mass2 = |x: &[f64], y: &mut [f64]| match mode {
        PreconditionMode::None => y.copy_from_slice(x),
        PreconditionMode::MassBlock => {
            mass_u.mul_vec(&x[..n], &mut y[..n]);
            mass_lambda.mul_vec(&x[n..], &mut y[n..]);
        }
    };
    let mut inverse = |x: &[f64], y: &mut [f64]| {
        mass2(x, &mut mx);
        let sol = lu
            .solve(&nalgebra::DVector::from_column_slice(&mx))
            .expect("saddle point matrix is singular");
        y.copy_from_slice(sol.as_slice());
    };
    let low = lanczos(&mut inverse, &mut mass, &start, LANCZOS_STEPS)?;

    let (top, top_res) = high.dominant();
    let (inv, inv_res) = low.dominant();
    let (max_abs, min_abs) = (top.abs(), 1.0 / inv.abs());
    Ok(ConditionEstimate {
        min_abs,
        max_abs,
        cond: max_abs / min_abs,
        converged: top_res <= LANCZOS_TOL * top.abs() && inv_res <= LANCZOS_TOL * inv.abs(),
    })
}

/// Generalized eigenvalues of the pencil `(B A⁻¹ Bᵀ, S_M)`, sorted.
pub fn schur_spectrum(a: &CsrMatrix, b: &CsrMatrix, s_m: &CsrMatrix) -> Result<Vec<f64>> {
    if a.nrows() > SCHUR_LIMIT {
        return Err(Error::TooLarge {
            size: a.nrows(),
            limit: SCHUR_LIMIT,
        });
    }
    let chol = a.to_dense().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let bt = b.transpose().to_dense();
    let y = chol.solve(&bt);
    let s = b.to_dense() * y;
    let s = (&s + s.transpose()) * 0.5;
    generalized_eigenvalues(&s, &s_m.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_condition() {
        let ev = symmetric_eigenvalues(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, -2.0, 4.0,
        ])));
        assert_eq!(ConditionEstimate::from_eigenvalues(&ev).cond, 4.0);
    }

    #[test]
    fn generalized_matches_inverse_product() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, -1.0]);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let ev = generalized_eigenvalues(&a, &m).unwrap();
        // det(A - ξM) = (2-2ξ)(-1-0.5ξ) - 1 = ξ² + ξ - 3
        let disc = 13.0_f64.sqrt();
        assert!((ev[0] - (-1.0 - disc) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (-1.0 + disc) / 2.0).abs() < 1e-12);
    }

    fn random_saddle(n: usize, m: usize) -> (CsrMatrix, CsrMatrix, CsrMatrix, CsrMatrix) {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 4.0 + (i % 5) as f64;
            if i + 1 < n {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
        }
        let mut b = DMatrix::<f64>::zeros(m, n);
        for i in 0..m {
            b[(i, 2 * i)] = 1.0 + 0.1 * i as f64;
            b[(i, 2 * i + 1)] = -0.5;
        }
        let mu = DMatrix::<f64>::from_diagonal_element(n, n, 2.0);
        let ml = DMatrix::<f64>::from_diagonal_element(m, m, 0.5);
        (
            CsrMatrix::from_dense(&a),
            CsrMatrix::from_dense(&b),
            CsrMatrix::from_dense(&mu),
            CsrMatrix::from_dense(&ml),
        )
    }

    #[test]
    fn lanczos_condition_matches_dense() {
        // large enough to take the Lanczos path
        let (n, m) = (1400, 700);
        let (a, b, mu, ml) = random_saddle(n, m);
        let op = SaddleOperator::new(&a, &b);
        let est = estimate_condition(&op, PreconditionMode::MassBlock, &mu, &ml).unwrap();
        let k = saddle_dense(&op);
        let ev = generalized_eigenvalues(&k, &block_dense(&mu, &ml)).unwrap();
        let exact = ConditionEstimate::from_eigenvalues(&ev);
        assert!(est.converged);
        assert!((est.max_abs - exact.max_abs).abs() < 1e-6 * exact.max_abs);
        assert!((est.min_abs - exact.min_abs).abs() < 1e-6 * exact.min_abs);
    }

    #[test]
    fn schur_spectrum_of_identity_blocks() {
        let a = CsrMatrix::from_diagonal(&[2.0; 4]);
        let b = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0]));
        let sm = CsrMatrix::identity(2);
        let ev = schur_spectrum(&a, &b, &sm).unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_finds_extremes_of_diagonal() {
        let diag: Vec<f64> = (0..60).map(|i| if i % 2 == 0 { 1.0 + i as f64 } else { -0.5 - i as f64 }).collect();
        let mut op = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        };
        let mut id = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
        let start: Vec<f64> = (0..60).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
        let out = lanczos(&mut op, &mut id, &start, 60).unwrap();
        assert!((out.min() + 59.5).abs() < 1e-8);
        assert!((out.max() - 59.0).abs() < 1e-8);
    }
}
