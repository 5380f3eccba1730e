//! Trace finite element discretization of the surface vector-Laplace problem
//!
//! The surface is the zero level of a level set function embedded in a structured
//! tetrahedral background mesh. Velocity and Lagrange multiplier live in outer
//! (volumetric) Lagrange spaces restricted to the cut tetrahedra; the tangential
//! constraint is imposed weakly through the multiplier, and both bilinear forms carry a
//! volume normal-derivative stabilization. The resulting saddle point system is solved
//! with block-preconditioned MINRES.
//!
//! Module map:
//! - [`mesh`]: background triangulation and active (cut) tetrahedra
//! - [`geometry`]: level sets, discrete surface, normal fields, closest-point maps
//! - [`fespace`]: outer finite element spaces, interpolation, Dirichlet masks
//! - [`assembly`]: quadrature and assembly of all system blocks
//! - [`linalg`]: sparse matrices, SSOR-PCG, MINRES, spectral diagnostics
//! - [`verification`]: manufactured solutions, error norms, convergence studies
//! - [`io`]: `.dat` tables, VTK and MatrixMarket output, run configuration parsing

pub mod assembly;
pub mod element;
pub mod error;
pub mod fespace;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod verification;

pub use error::{Error, Result};

/// Points and vectors in R³.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 real matrices.
pub type Mat3 = nalgebra::Matrix3<f64>;
