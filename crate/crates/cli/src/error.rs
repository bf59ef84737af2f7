use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const IO: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const GATE: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{path}`: {reason}")]
    Validation { path: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("oracle gate failed: relative L2 error {l2_error} >= {threshold}")]
    GateFailed { l2_error: f64, threshold: f64 },
}

impl CliError {
    pub fn validation(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation { .. } => exit::VALIDATION,
            Self::Io(_) => exit::IO,
            Self::GateFailed { .. } => exit::GATE,
        }
    }
}

impl From<qcomb::Error> for CliError {
    fn from(e: qcomb::Error) -> Self {
        use qcomb::Error as E;
        let path = match &e {
            E::InvalidParameter { field, .. } => (*field).to_string(),
            E::DegenerateVariance { .. } => "sigma_ceo".into(),
            E::GridTooCoarse { .. } => "grid.step".into(),
            E::TruncationTooNarrow { .. } => "trunc.rel_tol".into(),
            E::GridMismatch(_) => "oracle.grid".into(),
            E::ZeroIntegral(_) | E::NotNormalized { .. } => "grid".into(),
            E::SignalTooShort { .. } => "signal".into(),
            E::TraceMomentUnderflow { .. } => "state".into(),
        };
        Self::Validation {
            path,
            reason: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
