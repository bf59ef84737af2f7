//! Run configuration, loaded from TOML.
//!
//! Comb and envelope parameters sit at the top level; grid, truncation,
//! oracle and output settings live in dotted sections:
//!
//! ```toml
//! mu_ceo = 0.3
//! mu_rep = 1.0
//! sigma_ceo = 0.05
//! sigma_rep = 0.03
//! nu_c = 5.0
//! bandwidth_B = 2.0
//!
//! grid.start = 0.0
//! grid.step = 0.001
//! grid.count = 10001
//! ```

use std::path::{Path, PathBuf};

use qcomb::{example, CombParams, EnvelopeModel, FrequencyGrid, TruncationPolicy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl From<GridConfig> for FrequencyGrid {
    fn from(g: GridConfig) -> Self {
        FrequencyGrid {
            start: g.start,
            step: g.step,
            count: g.count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

impl Default for TruncConfig {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_samples")]
    pub n_samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Grid for the Monte Carlo estimate; must equal the analytic grid.
    pub grid: Option<GridConfig>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            grid: None,
        }
    }
}

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: all_formats(),
        }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mu_ceo: f64,
    pub mu_rep: f64,
    pub sigma_ceo: f64,
    pub sigma_rep: f64,
    pub nu_c: f64,
    #[serde(rename = "bandwidth_B")]
    pub bandwidth: f64,
    #[serde(default = "unit")]
    pub amplitude_scale: f64,
    pub alpha_sq: Option<f64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub trunc: TruncConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn unit() -> f64 {
    1.0
}

impl RunConfig {
    /// The worked example on `[0, 10]` with step 0.001.
    pub fn fig1_defaults() -> Self {
        Self {
            mu_ceo: example::MU_CEO,
            mu_rep: example::MU_REP,
            sigma_ceo: example::SIGMA_CEO,
            sigma_rep: example::SIGMA_REP,
            nu_c: example::NU_C,
            bandwidth: example::BANDWIDTH,
            amplitude_scale: 1.0,
            alpha_sq: None,
            grid: GridConfig {
                start: 0.0,
                step: 0.001,
                count: 10_001,
            },
            trunc: TruncConfig::default(),
            oracle: OracleConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| CliError::validation("config", e.message()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let reason = e.inner().message().to_string();
            CliError::Validation {
                path: error_path(&e.path().to_string(), &reason),
                reason,
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn comb(&self) -> CombParams {
        CombParams {
            mu_ceo: self.mu_ceo,
            mu_rep: self.mu_rep,
            sigma_ceo: self.sigma_ceo,
            sigma_rep: self.sigma_rep,
            nu_c: self.nu_c,
        }
    }

    pub fn envelope(&self) -> EnvelopeModel {
        EnvelopeModel {
            nu_c: self.nu_c,
            bandwidth: self.bandwidth,
            amplitude_scale: self.amplitude_scale,
        }
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid.into()
    }

    pub fn truncation(&self) -> TruncationPolicy {
        TruncationPolicy::Auto {
            rel_tol: self.trunc.rel_tol,
        }
    }

    /// Checks every parameter before any computation runs.
    pub fn validate(&self) -> Result<(), CliError> {
        let comb = self.comb();
        let env = self.envelope();
        comb.validate()?;
        env.validate()?;
        self.grid().validate()?;
        let policy = self.truncation();
        let range = policy.resolve(&comb, &env)?;
        if let Some(m) = range.iter().find(|&m| comb.line_variance(m) == 0.0) {
            return Err(CliError::validation(
                "sigma_ceo",
                format!("line m = {m} has zero width; a sampled PSD needs sigma_ceo > 0"),
            ));
        }
        qcomb::spectral::check_resolution(&comb, range, &self.grid())?;
        if let Some(a) = self.alpha_sq {
            if !(a.is_finite() && a >= 0.0) {
                return Err(CliError::validation(
                    "alpha_sq",
                    format!("must be >= 0, got {a}"),
                ));
            }
        }
        if self.oracle.n_samples == 0 {
            return Err(CliError::validation("oracle.n_samples", "must be >= 1"));
        }
        if let Some(g) = self.oracle.grid {
            let g: FrequencyGrid = g.into();
            g.validate()?;
            if !g.matches(&self.grid(), 1e-12) {
                return Err(CliError::validation(
                    "oracle.grid",
                    format!("{g:?} differs from the analytic grid {:?}", self.grid()),
                ));
            }
        }
        Ok(())
    }
}

/// Dotted key path of a decoding error. Missing keys are reported against
/// their parent table, so the key name is appended from the message.
fn error_path(path: &str, reason: &str) -> String {
    let parent = if path == "." { "" } else { path };
    let missing = reason
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next());
    match (parent, missing) {
        ("", Some(key)) => key.to_string(),
        (p, Some(key)) => format!("{p}.{key}"),
        ("", None) => "config".to_string(),
        (p, None) => p.to_string(),
    }
}
