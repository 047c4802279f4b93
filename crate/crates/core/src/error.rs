use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a singular configuration (coincident points, ξ = 0).
    #[error("singular geometry: {0}")]
    Singular(String),

    /// Result would not be representable in f64.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Two evaluation strategies that must agree did not.
    #[error("strategy disagreement for F_A: direct = {direct:e}, laplace = {laplace:e}")]
    StrategyMismatch { direct: f64, laplace: f64 },

    /// Problem configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Evaluation point too close to the boundary for the kernel quadrature.
    #[error("interior margin violated: {0}")]
    Margin(String),

    /// Integrand returned NaN or infinity at a quadrature node.
    #[error("non-finite integrand on {surface} at node {node} ({point:?})")]
    NonFinite {
        surface: String,
        node: usize,
        point: Vec<f64>,
    },

    /// A kernel evaluation failed at a quadrature node.
    #[error("kernel failure on {surface} at node {node}: {source}")]
    Kernel {
        surface: String,
        node: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Config(_) | Error::Margin(_) | Error::Singular(_)
        )
    }
}
