use thiserror::Error;

/// Errors raised by the series algebra, the solvers and the validation tools.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value fell outside the domain where the closed form is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation has no closed form inside the exponential-polynomial class.
    #[error("unsupported combination: {0}")]
    Unsupported(String),

    /// Malformed or out-of-range input parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An expression exceeded the configured term-count cap.
    #[error("term-count cap exceeded at iterate {iterate}: {terms} terms > cap {cap}")]
    TermCap {
        iterate: usize,
        terms: usize,
        cap: usize,
    },

    /// An algebra error raised while building a specific iterate.
    #[error("iterate {iterate}: {source}")]
    Iteration {
        iterate: usize,
        #[source]
        source: Box<Error>,
    },

    /// The explicit time integrator blew up.
    #[error("finite-volume step unstable at t = {time}: |value| = {value:e}")]
    Unstable { time: f64, value: f64 },

    /// Every candidate of the convergence-control scan failed.
    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("no exact solution registered for {0}")]
    NoExactSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_iterate(self, iterate: usize) -> Self {
        match self {
            e @ (Error::TermCap { .. } | Error::Iteration { .. }) => e,
            e => Error::Iteration {
                iterate,
                source: Box::new(e),
            },
        }
    }
}
