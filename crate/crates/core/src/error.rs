use thiserror::Error;

/// Errors raised by the measurement, morphism and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension {0} is not a perfect square")]
    DimNotSquare(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("effect {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    EffectNotPsd { index: usize, min_eigenvalue: f64 },

    #[error("effects do not sum to the identity (max residual {0:.3e})")]
    SumNotIdentity(f64),

    #[error("duplicate outcome label {0}")]
    DuplicateLabel(i64),

    #[error("measurement has no effects")]
    Empty,

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("Bloch vector has norm {0} > 1")]
    BadBloch(f64),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("denominator vanishes for this effect")]
    ZeroDenominator,

    #[error("solver stalled: {0}")]
    SolverStall(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
