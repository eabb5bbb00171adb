use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error(
        "interface y = {interface} does not fall on a mesh line for N = {n} (N*H/A = {ratio})"
    )]
    MisalignedInterface {
        interface: f64,
        n: usize,
        ratio: f64,
    },
    #[error("cavity height gives a non-integer number of rows for N = {n} (N*B/A = {ratio})")]
    NonIntegerRows { n: usize, ratio: f64 },
    #[error("invalid material for subdomain {subdomain}: {reason}")]
    InvalidMaterial { subdomain: usize, reason: String },
    #[error("degenerate triangle (area {area:e})")]
    DegenerateTriangle { area: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not positive definite (pivot {pivot:e} at step {step})")]
    NotPositiveDefinite { step: usize, pivot: f64 },
    #[error("matrix is singular (no usable pivot at step {step})")]
    SingularMatrix { step: usize },
    #[error("start vector is zero")]
    ZeroStartVector,
    #[error("zero vector")]
    ZeroVector,
    #[error("QR iteration did not converge after {iterations} sweeps ({converged} of {total} eigenvalues found)")]
    NoConvergence {
        iterations: usize,
        converged: usize,
        total: usize,
    },
    #[error("shifted pencil is singular at shift {shift}")]
    SingularPencil { shift: num_complex::Complex64 },
    #[error("no eigenpair converged (best relative residual {best_residual:e})")]
    NoConvergedPairs { best_residual: f64 },
    #[error("invalid solver parameters: {0}")]
    InvalidSolverParameters(String),
    #[error("degenerate denominator in r_m for subdomain {subdomain} at lambda = {lambda}")]
    DegenerateDenominator {
        subdomain: usize,
        lambda: num_complex::Complex64,
    },
    #[error("invalid search box or grid: {0}")]
    InvalidSearch(String),
    #[error("need at least 3 samples for an order fit, got {0}")]
    InsufficientSamples(usize),
    #[error("error samples must be positive (sample {index} is {value:e})")]
    NonPositiveError { index: usize, value: f64 },
    #[error("mesh sizes must be strictly decreasing (sample {index})")]
    NonDecreasingMeshSize { index: usize },
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidGeometry(_)
                | Error::MisalignedInterface { .. }
                | Error::NonIntegerRows { .. }
                | Error::InvalidMaterial { .. }
                | Error::InvalidSolverParameters(_)
                | Error::InvalidSearch(_)
                | Error::Config { .. }
                | Error::Json(_)
        )
    }
}
