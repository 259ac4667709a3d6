//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("register too large: {qubits} qubits exceeds cap {cap}")]
    RegisterTooLarge { qubits: usize, cap: usize },

    #[error("operator is not hermitian: {0}")]
    NotHermitian(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("resonance collision: detuning {delta:.3e} below {tol:.3e}; the few-level bound is vacuous")]
    ResonanceCollision { delta: f64, tol: f64 },

    #[error("eigensolver did not converge: {0}")]
    EigenNonConverged(String),

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("order cap exceeded: |{order}| > {cap}")]
    OrderCapExceeded { order: i32, cap: i32 },

    #[error("unsupported option: {0}")]
    Unsupported(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
