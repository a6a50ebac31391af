use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("interpolation nodes coincide: {0}")]
    Node(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("degenerate twist: {0}")]
    DegenerateTwist(String),

    #[error("rho branch `{branch}` makes mu singular (kappa_tilde + kappa - 2 rho = 0); use the `{other}` branch")]
    MuSingular { branch: String, other: String },

    #[error("arguments coincide: {0}")]
    Coincidence(String),

    #[error("expected {expected} Bethe parameters, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("parameters are not on-shell: max Bethe residual {max_residual:e} exceeds {tolerance:e}")]
    NotOnShell { max_residual: f64, tolerance: f64 },

    #[error("degenerate argument: {0}")]
    DegenerateArgument(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
