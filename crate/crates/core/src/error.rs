use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error categories surfaced by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("matrix is not positive definite: pivot {pivot} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("no convergence after {iterations} iterations (last relative residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("condition estimate did not converge: {reason} (lambda_max ~ {lambda_max:e}, lambda_min ~ {lambda_min:e})")]
    Estimation {
        reason: String,
        lambda_max: f64,
        lambda_min: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short category name used by the command line driver.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Geometry(_) => "geometry",
            Error::NotPositiveDefinite { .. } | Error::Solver(_) => "solver",
            Error::Convergence { .. } | Error::Estimation { .. } => "convergence",
            Error::Io(_) => "io",
        }
    }
}
