use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    Parameter { key: String, reason: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("singular {axis}-axis flux system (condition estimate {condition:.3e})")]
    SingularFlux { axis: char, condition: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("equilibrium refinement did not converge in {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("finite-difference probe on component {component} crosses the {boundary} boundary")]
    Smoothness { component: usize, boundary: &'static str },

    #[error("characteristic polynomial overflow: {0}")]
    Overflow(String),

    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,

    #[error("integration diverged at t = {time:.6} s (component {component})")]
    Divergence { time: f64, component: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Configuration and parameter problems are the caller's fault; everything else is numeric.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parameter { .. } | Error::Config { .. })
    }

    pub fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::Parameter { key: key.to_string(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
