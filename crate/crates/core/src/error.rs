use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate law: {0}")]
    DegenerateLaw(String),
    #[error("moment of order {order} does not exist for alpha = {alpha}")]
    MomentDoesNotExist { order: f64, alpha: f64 },
    #[error("diverges: {0}")]
    Diverges(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("truncation budget exceeded: more than {particles} particles needed; achievable tolerance with the budget is {achievable:e}")]
    /// `particles` is a lower bound on the window size the tolerance requires.
    TruncationBudget { particles: u64, achievable: f64 },
    #[error("insufficient replications: need at least {needed}, got {got}")]
    InsufficientReplications { needed: usize, got: usize },
    #[error("window too large: {0}")]
    WindowTooLarge(String),
    #[error("covariance matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("fBm limit requires alpha < 1, got {0}")]
    FbmLimitRequiresAlphaBelowOne(f64),
    #[error("no Markov-violation witness found on the search grid (largest gap {max_gap:e})")]
    NoWitness { max_gap: f64 },
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
