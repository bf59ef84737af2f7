use thiserror::Error;

/// Errors raised by the spectral, oracle and state layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate line variance for m = {m}: sigma_ceo^2 + m^2 sigma_rep^2 = 0; use the delta-comb representation")]
    DegenerateVariance { m: i64 },

    #[error(
        "grid step {step} cannot resolve the narrowest line (width {sigma}); need step <= {limit}"
    )]
    GridTooCoarse { step: f64, sigma: f64, limit: f64 },

    #[error("truncation range [{m_min}, {m_max}] excludes line m = {m} with relative envelope weight {weight:e} >= {rel_tol:e}")]
    TruncationTooNarrow {
        m_min: i64,
        m_max: i64,
        m: i64,
        weight: f64,
        rel_tol: f64,
    },

    #[error("spectral density has non-positive integral {0}")]
    ZeroIntegral(f64),

    #[error("spectral density is not normalized (integral {integral})")]
    NotNormalized { integral: f64 },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error(
        "signal duration {duration} covers fewer than {min_periods} repetition periods ({period})"
    )]
    SignalTooShort {
        duration: f64,
        period: f64,
        min_periods: f64,
    },

    #[error("trace moment underflows f64; ln value is {ln_value}")]
    TraceMomentUnderflow { ln_value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
