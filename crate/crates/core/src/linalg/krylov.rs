//! Preconditioned conjugate gradients and MINRES.

use super::sparse::CsrMatrix;
use super::ssor::Ssor;
use crate::{Error, Result};

/// A symmetric linear map `x ↦ y`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y);
    }
}

/// Approximate inverse `z ≈ M⁻¹ r`; may keep statistics, hence `&mut self`.
pub trait Preconditioner {
    fn apply(&mut self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl Preconditioner for Ssor<'_> {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        Ssor::apply(self, r, z);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `‖r_k‖ / ‖r_0‖` at exit.
    pub relative_residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// PCG from the initial guess in `x`; stops once `‖r‖₂ ≤ rtol ‖r₀‖₂`.
pub fn pcg(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    precond: &mut dyn Preconditioner,
    rtol: f64,
    maxit: usize,
) -> CgOutcome {
    let n = op.dim();
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let r0 = norm(&r);
    let mut history = vec![1.0];
    if r0 == 0.0 {
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            history,
        };
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=maxit {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            break;
        }
        let alpha = rz / pq;
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        rel = norm(&r) / r0;
        history.push(rel);
        if rel <= rtol {
            return CgOutcome {
                iterations: it,
                relative_residual: rel,
                converged: true,
                history,
            };
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    CgOutcome {
        iterations: history.len() - 1,
        relative_residual: rel,
        converged: false,
        history,
    }
}

/// Symmetric Gauss–Seidel preconditioned CG from a zero initial guess.
pub fn ssor_pcg(m: &CsrMatrix, b: &[f64], rtol: f64, maxit: usize) -> Result<(Vec<f64>, usize)> {
    let mut precond = Ssor::gauss_seidel(m, 1);
    let mut x = vec![0.0; b.len()];
    let out = pcg(m, b, &mut x, &mut precond, rtol, maxit);
    if !out.converged {
        return Err(Error::NotConverged {
            solver: "SSOR-PCG",
            iterations: out.iterations,
            residual: out.relative_residual,
            history: out.history,
        });
    }
    Ok((x, out.iterations))
}

#[derive(Debug, Clone)]
pub struct MinresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Preconditioned residual estimate relative to its initial value, per iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Preconditioned MINRES (Paige–Saunders) from `x₀ = 0`.
///
/// Convergence is declared when the `M⁻¹`-norm of the residual has dropped by `rtol`.
pub fn minres(
    op: &dyn LinearOperator,
    b: &[f64],
    precond: &mut dyn Preconditioner,
    rtol: f64,
    maxit: usize,
) -> Result<MinresOutcome> {
    let n = op.dim();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = vec![0.0; n];
    precond.apply(&r1, &mut y);
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let beta1 = beta1_sq.sqrt();
    let mut history = vec![1.0];
    if beta1 == 0.0 {
        return Ok(MinresOutcome {
            x,
            iterations: 0,
            history,
            converged: true,
        });
    }
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];

    for itn in 1..=maxit {
        let s = 1.0 / beta;
        v.iter_mut().zip(&y).for_each(|(vi, yi)| *vi = s * yi);
        op.apply(&v, &mut y);
        if itn >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond.apply(&r2, &mut y);
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if beta_sq < 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        beta = beta_sq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        // w1 now holds the oldest direction, w2 the previous one
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);

        let rel = phibar / beta1;
        history.push(rel);
        if rel <= rtol || beta == 0.0 {
            return Ok(MinresOutcome {
                x,
                iterations: itn,
                history,
                converged: true,
            });
        }
    }
    let residual = *history.last().unwrap();
    Err(Error::NotConverged {
        solver: "MINRES",
        iterations: maxit,
        residual,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn minres_diagonal_one_iteration() {
        let m = CsrMatrix::from_diagonal(&[2.0; 10]);
        let out = minres(&m, &[1.0; 10], &mut IdentityPreconditioner, 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.x.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn cg_identity_one_iteration() {
        let m = CsrMatrix::identity(7);
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 2.0).collect();
        let (x, its) = ssor_pcg(&m, &b, 1e-12, 10).unwrap();
        assert!(its <= 1);
        assert_eq!(x, b);
    }

    #[test]
    fn minres_indefinite_small() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, -3.0, 1.0, 0.0, 1.0, 1.0]);
        let m = CsrMatrix::from_dense(&a);
        let b = [1.0, 2.0, 3.0];
        let out = minres(&m, &b, &mut IdentityPreconditioner, 1e-12, 50).unwrap();
        let exact = a.lu().solve(&DVector::from_row_slice(&b)).unwrap();
        for i in 0..3 {
            assert!((out.x[i] - exact[i]).abs() < 1e-10);
        }
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let mut a = DMatrix::<f64>::identity(20, 20) * 2.0;
        for i in 0..19 {
            a[(i, i + 1)] = -1.0;
            a[(i + 1, i)] = -1.0;
        }
        let m = CsrMatrix::from_dense(&a);
        let err = ssor_pcg(&m, &[1.0; 20], 1e-14, 1).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }
}
