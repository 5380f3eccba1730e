//! Sparse linear algebra, Krylov solvers and spectral diagnostics.

mod block;
mod krylov;
mod sparse;
pub mod spectral;
mod ssor;

pub use block::{BlockPreconditioner, InnerCounters, SaddleOperator};
pub use krylov::{
    dot, minres, norm, pcg, ssor_pcg, CgOutcome, IdentityPreconditioner, LinearOperator,
    MinresOutcome, Preconditioner,
};
pub use sparse::{CsrMatrix, TripletBuffer, MAX_MARKET_DIMENSION};
pub use spectral::{estimate_condition, schur_spectrum, ConditionEstimate, PreconditionMode};
pub use ssor::Ssor;
