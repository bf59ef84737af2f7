//! Brute-force checks of the analytic spectrum: Monte Carlo ensemble
//! averaging, time-domain synthesis with finite-duration periodograms, and
//! the finite-T epsilon function.

mod epsilon;
mod monte_carlo;
mod sampling;
mod signal;

pub use epsilon::{epsilon_envelope, epsilon_estimate};
pub use monte_carlo::{
    compare_positive_half, mc_estimate, mc_psd, Accumulation, OracleReport, CHUNK_DRAWS,
};
pub use sampling::{draw_at, draw_rng, sample_params, SampleDraw};
pub use signal::{
    autocorrelation, periodogram, synth_pulse_train, wiener_khintchine_residual, SignalSpec,
    TimeSignal, MIN_PERIODS,
};
