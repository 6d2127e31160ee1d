use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("likelihood ratio undefined at theta = {theta}: both densities vanish")]
    UndefinedRatio { theta: f64 },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("target ({fp}, {tp}) is outside the feasible region: violates {half_plane}")]
    Infeasible { fp: f64, tp: f64, half_plane: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
