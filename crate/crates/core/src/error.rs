use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate bounding box: spanning vectors are linearly dependent")]
    DegenerateBox,
    #[error("refinement level must be at least 1, got {0}")]
    InvalidLevel(u32),
    #[error("surface not found: the level set does not change sign on the mesh")]
    SurfaceNotFound,
    #[error("unsupported polynomial degree {0} (expected 1 or 2)")]
    UnsupportedDegree(usize),
    #[error("multiplier degree {multiplier} exceeds velocity degree {velocity}; discrete inf-sup stability is not guaranteed")]
    DegreeMismatch { velocity: usize, multiplier: usize },
    #[error("invalid stabilization parameter: {0}")]
    InvalidStabilization(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{solver} did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("problem too large for a dense computation: {size} unknowns (limit {limit})")]
    TooLarge { size: usize, limit: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
