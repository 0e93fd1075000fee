//! Crate-wide error type. Variants distinguish argument/input problems from
//! typed pipeline failures so the CLI can map them to distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid corpus: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("input tensor is not symmetric")]
    NotSymmetric,

    #[error("rank deficient at k={k}: singular value {value:e} below threshold")]
    RankDeficient { k: usize, value: f64 },

    #[error("privatized spectrum collapsed: noisy second moment is rank deficient at k={k}")]
    PrivatizedSpectrumCollapsed { k: usize },

    #[error("calibration collapsed: released lower bound for {quantity} hit zero")]
    CalibrationCollapsed { quantity: &'static str },

    #[error("gap lower bound hit zero")]
    GapCollapsed,

    #[error("eigen-gap collapsed: gamma_s must be positive, got {0}")]
    DegenerateGap(f64),

    #[error("whitening sensitivity undefined: sigma_k + sigma_(k+1) must be positive, got {0}")]
    DegenerateSpectrum(f64),

    #[error("non-positive eigenvalue {value} at position {index}; increase data or check k")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("topic column {index} collapsed to zero after simplex projection")]
    TopicCollapsed { index: usize },
}

impl Error {
    /// Process exit code for the CLI: 2 for argument/input errors, 3 for
    /// typed pipeline failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_)
            | Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::Validation(_)
            | Error::ShapeMismatch(_)
            | Error::NotSymmetric => 2,
            Error::RankDeficient { .. }
            | Error::PrivatizedSpectrumCollapsed { .. }
            | Error::CalibrationCollapsed { .. }
            | Error::GapCollapsed
            | Error::DegenerateGap(_)
            | Error::DegenerateSpectrum(_)
            | Error::NonPositiveEigenvalue { .. }
            | Error::TopicCollapsed { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
