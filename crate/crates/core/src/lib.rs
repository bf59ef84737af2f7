//! Spectral density and mixed quantum state of a frequency comb whose
//! carrier-envelope offset and repetition frequencies fluctuate as
//! independent Gaussian random variables.
//!
//! - [`spectral`]: closed-form ensemble-averaged PSD, envelope, truncation.
//! - [`coherence`]: mutual coherence function and coherence time.
//! - [`lines`]: peak finding and line-shape fitting.
//! - [`oracle`]: Monte Carlo and time-domain checks of the closed form.
//! - [`state`]: diagonal single-photon state, tensor powers, mixed coherent state.

pub mod coherence;
pub mod error;
pub mod grid;
pub mod io;
pub mod lines;
pub mod oracle;
pub mod spectral;
pub mod state;

pub use coherence::{coherence_time, mutual_coherence, CoherenceFunction, CoherenceTime};
pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use spectral::{
    envelope_eval, line_component, normalize, psd_analytic, psd_analytic_with_range, psd_one_sided,
    spectrum, truncation_bounds, CombParams, DeltaComb, EnvelopeModel, LineRange, SpectralDensity,
    Spectrum, TruncationPolicy,
};
pub use state::{
    n_photon_trace_moment, photon_number_pmf, purity, sigma_operator, single_photon_state,
    DiagonalDensityMatrix, MixedCoherentState, PhotonPmf, SigmaOperator, StateDiagnostics,
    TensorPowerState,
};

/// Parameters of the worked example: `nu_c = 5`, `B = 2`, `mu_ceo = 0.3`,
/// `mu_rep = 1`, `sigma_ceo = 0.05`, `sigma_rep = 0.03` (arbitrary units).
pub mod example {
    use super::{CombParams, EnvelopeModel};

    pub const NU_C: f64 = 5.0;
    pub const BANDWIDTH: f64 = 2.0;
    pub const MU_CEO: f64 = 0.3;
    pub const MU_REP: f64 = 1.0;
    pub const SIGMA_CEO: f64 = 0.05;
    pub const SIGMA_REP: f64 = 0.03;

    pub fn params() -> CombParams {
        CombParams {
            mu_ceo: MU_CEO,
            mu_rep: MU_REP,
            sigma_ceo: SIGMA_CEO,
            sigma_rep: SIGMA_REP,
            nu_c: NU_C,
        }
    }

    pub fn envelope() -> EnvelopeModel {
        EnvelopeModel {
            nu_c: NU_C,
            bandwidth: BANDWIDTH,
            amplitude_scale: 1.0,
        }
    }
}
