use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("covariance error: {0}")]
    Covariance(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("undamped resonance of mode {mode} at omega = {omega}")]
    Resonance { mode: usize, omega: f64 },

    #[error("antiresonance at z = {z}, omega = {omega}: |H| = {magnitude:e}, sensitivity unreliable")]
    Antiresonance { z: f64, omega: f64, magnitude: f64 },

    #[error("position {position} lies outside the domain [0, {length}]")]
    OutsideDomain { position: f64, length: f64 },

    #[error("Gauss-Newton stagnated at iteration {iteration} (misfit {misfit:e}): no backtracking progress")]
    Stagnation { iteration: usize, misfit: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
