use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = PactError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PactError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic bytes {found:?}, expected \"PACT\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    #[error("container truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("container payload is {found} bytes but metadata describes {expected}")]
    SizeMismatch { expected: u64, found: u64 },

    #[error("invalid container metadata: {0}")]
    Metadata(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),
}

impl PactError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PactError::Io {
            path: path.into(),
            source,
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        // Negated so that NaN operands fail the check.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err($crate::error::PactError::Validation(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
