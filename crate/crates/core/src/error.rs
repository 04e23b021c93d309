use thiserror::Error;

use crate::embeddability::Classification;

/// Every failure mode of the embedding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains NaN or infinite entries")]
    NonFinite,
    #[error("eigenvalue iteration did not converge within {budget} sweeps")]
    NoConvergence { budget: usize },
    #[error("matrix is numerically singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("matrix does not have full column rank (smallest singular value {sigma_min:e}, threshold {threshold:e})")]
    RankDeficient { sigma_min: f64, threshold: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not pure imaginary diagonalizable: {}", .0.diagnostics.join("; "))]
    NotEmbeddable(Box<Classification>),
    #[error("positive witness is degenerate (smallest eigenvalue {min_eigenvalue:e})")]
    WitnessDegenerate { min_eigenvalue: f64 },
    #[error("target dimension {m_target} is smaller than the state dimension {n}")]
    BadDimension { m_target: usize, n: usize },
    #[error("mapped generator is not anti-hermitian (relative residual {residual:e})")]
    NotAntiHermitian { residual: f64 },
    #[error("matrix is not real anti-symmetric (relative residual {residual:e})")]
    NotAntiSymmetric { residual: f64 },
    #[error("matrix is not hermitian (relative residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not symmetric (relative residual {residual:e})")]
    NotSymmetric { residual: f64 },
    #[error("transforming matrix must be real (largest imaginary part {max_imag:e})")]
    RealityViolation { max_imag: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("size {requested} exceeds the configured cap {cap}")]
    SizeOverflow { requested: usize, cap: usize },
    #[error("sector with total number {total} is outside the truncation n_max = {n_max}")]
    BadSector { total: usize, n_max: usize },
    #[error("quadratic form is indefinite (eigenvalues span [{min_eigenvalue:e}, {max_eigenvalue:e}])")]
    Indefinite { min_eigenvalue: f64, max_eigenvalue: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
