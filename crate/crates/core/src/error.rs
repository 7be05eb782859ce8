use thiserror::Error;

/// Errors raised by the gate and state routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not unitary: ||M^dag M - I||_F = {residual:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("decomposition failed: reconstruction residual {residual:.3e}")]
    DecompositionFailed { residual: f64 },

    #[error("matrix is not a tensor product: rank-one fit residual {residual:.3e}")]
    NotAProduct { residual: f64 },

    #[error("state is not normalized: sum |a|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("{name} = {value} is outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
