use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension m = {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("not form bounded by this method: C_r = {c_r} at r = {r:e}")]
    NotFormBounded { r: f64, c_r: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("endomorphism at vertex {vertex} is not Hermitian (deviation {deviation:e})")]
    NotHermitian { vertex: usize, deviation: f64 },

    #[error("kernel handling: {0}")]
    Kernel(String),

    #[error("eigensolver did not converge: max residual {residual:e}")]
    Eigensolver { residual: f64 },

    #[error("matrix exponential not accurate: achieved residual {residual:e}")]
    Exponential { residual: f64 },

    #[error("invalid path configuration: {0}")]
    PathConfig(String),
}
