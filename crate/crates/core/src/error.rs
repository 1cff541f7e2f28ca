use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    NoModes,

    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("operator needs two distinct modes, got ({0}, {0})")]
    SameModes(usize),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("state is not normalized (norm {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("interaction kind `two_body_tensor` requires an explicit tensor")]
    TensorRequired,

    #[error("qubit states ill-defined: gap {gap:.3e} between levels {lower} and {upper}")]
    DegenerateQubit {
        lower: usize,
        upper: usize,
        gap: f64,
    },

    #[error(
        "integrator did not reach tolerance {tolerance:.1e} after {halvings} halvings \
         (last step {step:.3e}, error {error:.3e}, norm drift {norm_drift:.3e})"
    )]
    Integrator {
        tolerance: f64,
        halvings: u32,
        step: f64,
        error: f64,
        norm_drift: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
