use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis not met: {hypothesis} (got {detail})")]
    Precondition { hypothesis: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge for {operator} at x = {x}, n = {n} (error estimate {error_estimate:e})")]
    Quadrature {
        operator: &'static str,
        x: f64,
        n: u32,
        error_estimate: f64,
    },

    #[error("function `{function}` has no analytic derivative of order {order}")]
    MissingDerivative { function: String, order: usize },

    #[error("grid approximant flagged at stage {stage}: validation residual {residual:e} exceeds ceiling {ceiling:e}")]
    FlaggedApproximant {
        stage: usize,
        residual: f64,
        ceiling: f64,
    },

    #[error("modulus estimate {estimate:e} exceeds closed form {closed_form:e} for `{function}` at theta = {theta}")]
    ModulusMismatch {
        function: String,
        theta: f64,
        estimate: f64,
        closed_form: f64,
    },
}
