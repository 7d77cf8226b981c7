use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants are grouped by the kind of failure so front ends can map them
/// to stable exit codes (see [`ErwError::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErwError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size cap was exceeded without an explicit override.
    #[error(
        "resource cap exceeded: {what} = {requested} > cap {cap} (pass an override to proceed)"
    )]
    ResourceCap {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    /// The memory parameter lies in a regime the requested quantity does not cover.
    #[error("unsupported regime: p = {p} ({reason})")]
    UnsupportedRegime { p: f64, reason: String },

    /// The observation makes the estimator undefined (division by a zero position).
    #[error("estimate undefined at this observation: {0}")]
    UndefinedEstimate(String),
}

impl ErwError {
    pub fn domain(msg: impl Into<String>) -> Self {
        ErwError::Domain(msg.into())
    }

    pub(crate) fn unsupported(p: f64, reason: impl Into<String>) -> Self {
        ErwError::UnsupportedRegime {
            p,
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 validation, 3 resource cap, 4 unsupported regime.
    pub fn exit_code(&self) -> i32 {
        match self {
            ErwError::Domain(_) | ErwError::UndefinedEstimate(_) => 2,
            ErwError::ResourceCap { .. } => 3,
            ErwError::UnsupportedRegime { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, ErwError>;
