use thiserror::Error;

/// Errors raised by the numerical kernels and drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported fractional order {0}: expected a value in (0,1) or (1,2)")]
    UnsupportedOrder(f64),

    #[error("quadrature did not reach the requested accuracy (estimate {estimate}, error bound {error_bound:e})")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("direction subproblem did not converge: Frank-Wolfe gap {gap:e} after {iterations} iterations")]
    Subproblem { gap: f64, iterations: usize },

    #[error("line search failed after {backtracks} backtracks (t = {t_value:e})")]
    LineSearch { backtracks: usize, t_value: f64 },

    #[error("coordinate {index}: {source}")]
    Coordinate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("instance format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
