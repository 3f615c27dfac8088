use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("input is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("input is not Hermitian (asymmetry {asym:e})")]
    NotHermitian { asym: f64 },
    #[error("not an orthogonal projection (defect {defect:e})")]
    NotProjection { defect: f64 },
    #[error("projection has zero trace")]
    ZeroTrace,
    #[error("projection is not in the diagonal algebra")]
    NotInDiagonal,
    #[error("matrix is singular")]
    Singular,
    #[error("element does not belong to model {0}")]
    ModelMismatch(String),
    #[error("cutoff {cutoff} exceeds model capability {max}")]
    CutoffTooLarge { cutoff: usize, max: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("determinant vanishes ({det:e}); no outer factor exists")]
    DeterminantZero { det: f64 },
    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("unitarity check failed: ||u*u - 1|| = {defect:e}")]
    UnitarityFailure { defect: f64 },
    #[error("compressed determinant vanishes ({det:e})")]
    DeltaPhiZero { det: f64 },
    #[error("|a| is not strictly positive (min eigenvalue {min_eig:e})")]
    NotStrictlyPositive { min_eig: f64 },
    #[error("approximant too far: ||u - f|| = {distance} >= 1")]
    ApproximantTooFar { distance: f64 },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("Toeplitz operator is not invertible (sigma_min {sigma_min:e})")]
    NotInvertible { sigma_min: f64 },
    #[error("residual of {identity} is {value:e}, above {tol:e}")]
    ResidualExceeded {
        identity: &'static str,
        value: f64,
        tol: f64,
    },
    #[error("weight has non-positive samples")]
    NonPositiveWeight,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
}
