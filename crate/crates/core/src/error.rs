use thiserror::Error;

/// Errors produced by the spinflow toolkit.
#[derive(Debug, Error)]
pub enum SpinflowError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("operation `{op}` is not supported on the {domain} domain")]
    UnsupportedDomain { op: &'static str, domain: &'static str },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("iteration did not converge after {iterations} iterations (last residual {last:.3e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("iteration diverged at iteration {iterations} (update norm {last:.3e})")]
    Divergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("point ({x:.6}, {y:.6}) lies outside the source chart")]
    OutOfDomain { x: f64, y: f64 },

    #[error("field does not decay: {fraction:.3e} of its energy sits in the outer region")]
    Decay { fraction: f64 },

    #[error("bubble extraction failed: {0}")]
    Extraction(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SpinflowError> = std::result::Result<T, E>;
