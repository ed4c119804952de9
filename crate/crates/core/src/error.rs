//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at row {row}, column {column}: {message}")]
    Csv {
        /// 1-based data row (0 = header).
        row: usize,
        /// 1-based column, 0 when the column is unknown.
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model fit failed for model {model_id}: {message}")]
    FitFailure { model_id: usize, message: String },

    #[error("quasi-separation detected (parameter norm exceeded {cap}); refit with ridge > 0")]
    QuasiSeparation { cap: f64 },

    #[error("singular information matrix; design column {column} ({name}) is collinear")]
    SingularInformation { column: usize, name: String },

    #[error("threshold selected no candidates under the full model; lower the threshold")]
    ThresholdTooHigh,

    #[error("linear program error: {0}")]
    Lp(String),

    #[error("configuration error: {0}")]
    Config(String),
}
