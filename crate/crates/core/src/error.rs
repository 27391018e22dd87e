use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Model or sampler parameters outside the admissible region.
    #[error("rejected parameters: {0}")]
    InvalidParameters(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    /// `S_xx` or `S_yy` is numerically singular.
    #[error("near-singular {which}: min eigenvalue {min_eig:e} (max {max_eig:e})")]
    Singular {
        which: &'static str,
        min_eig: f64,
        max_eig: f64,
    },

    #[error("spectral parameter {re}+{im}i lies on a pole or branch cut: {reason}")]
    BranchCut { re: f64, im: f64, reason: &'static str },

    #[error("numerical failure in {what}: achieved tolerance {achieved:e}")]
    Numerical { what: &'static str, achieved: f64 },

    /// Inversion of the linearization failed or left a large identity residual.
    #[error("conditioning failure: identity residual {residual:e}")]
    Conditioning { residual: f64 },

    #[error("spectral parameter outside admissible domain: {0}")]
    Domain(String),

    #[error("eigenvalue {value} exceeds 1 beyond rounding tolerance")]
    OutOfRange { value: f64 },

    #[error("malformed data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
