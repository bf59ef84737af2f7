//! Discretized mixed quantum states of the comb.
//!
//! On a frequency grid the epsilon function becomes a Kronecker delta, so the
//! single-photon density matrix is diagonal with entries `p_i = S(nu_i) dnu`.
//! The n-photon state is the n-fold tensor power of that matrix and the mixed
//! coherent state is a Poisson mixture of tensor powers. Neither is ever
//! materialized: every observable is computed from the factorized form.

use serde::Serialize;

use crate::coherence::{coherence_time, CoherenceTime};
use crate::error::{invalid, Error, Result};
use crate::grid::FrequencyGrid;
use crate::spectral::SpectralDensity;

/// Tolerance on the unit trace of inputs and constructed states.
pub const TRACE_TOL: f64 = 1e-9;

/// Target Poisson tail mass for the default photon-number cutoff.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Single-photon density matrix, diagonal in the frequency basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalDensityMatrix {
    grid: FrequencyGrid,
    probs: Vec<f64>,
}

impl DiagonalDensityMatrix {
    /// Builds a state from bin probabilities, rescaling them to sum to one.
    pub fn from_weights(grid: FrequencyGrid, weights: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if weights.len() != grid.count {
            return Err(invalid("probs", "length differs from grid"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("probs", "must be finite and >= 0"));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ZeroIntegral(total));
        }
        Ok(Self {
            grid,
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    /// Matrix element `rho(nu_i, nu_j)`: zero off the diagonal.
    pub fn element(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.probs[i]
        } else {
            0.0
        }
    }

    pub fn trace(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `tr(rho^2) = sum p_i^2`.
    pub fn purity(&self) -> f64 {
        self.power_sum(2)
    }

    /// `sum p_i^k`.
    pub fn power_sum(&self, k: u32) -> f64 {
        self.probs.iter().map(|p| p.powi(k as i32)).sum()
    }

    /// Density `p_i / dnu` on the same grid.
    pub fn to_density(&self) -> SpectralDensity {
        let values = self.probs.iter().map(|p| p / self.grid.step).collect();
        SpectralDensity {
            grid: self.grid,
            values,
            normalized: false,
        }
    }

    pub fn coherence_time(&self) -> CoherenceTime {
        coherence_time(&self.to_density())
    }

    pub fn to_csv(&self) -> String {
        let nu: Vec<f64> = self.grid.iter().collect();
        crate::io::csv_table(&["nu", "p"], &[&nu, &self.probs])
    }
}

/// Single-photon state from a normalized PSD: `p_i = S(nu_i) dnu`, then
/// rescaled so the trace is exactly one.
pub fn single_photon_state(sd: &SpectralDensity) -> Result<DiagonalDensityMatrix> {
    let integral = sd.integral();
    if !sd.normalized || (integral - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotNormalized { integral });
    }
    let weights = sd.values.iter().map(|s| s * sd.grid.step).collect();
    DiagonalDensityMatrix::from_weights(sd.grid, weights)
}

pub fn purity(rho: &DiagonalDensityMatrix) -> f64 {
    rho.purity()
}

/// `rho_1^{(x) n}`, kept in factorized form.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPowerState {
    pub base: DiagonalDensityMatrix,
    pub n: u32,
}

impl TensorPowerState {
    pub fn new(base: DiagonalDensityMatrix, n: u32) -> Self {
        Self { base, n }
    }

    pub fn trace(&self) -> f64 {
        1.0
    }

    /// `ln tr(rho_n^k) = n ln sum p^k`.
    pub fn ln_trace_moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(invalid("k", "must be >= 1"));
        }
        if k == 1 || self.n == 0 {
            return Ok(0.0);
        }
        Ok(self.n as f64 * self.base.power_sum(k).ln())
    }
}

/// `tr(rho_n^k) = (sum p^k)^n`. When that underflows `f64` the error carries
/// the log-domain value.
pub fn n_photon_trace_moment(state: &TensorPowerState, k: u32) -> Result<f64> {
    let ln_value = state.ln_trace_moment(k)?;
    if k == 1 || state.n == 0 {
        return Ok(1.0);
    }
    let value = state.base.power_sum(k).powi(state.n as i32);
    if value == 0.0 || !value.is_normal() {
        return Err(Error::TraceMomentUnderflow { ln_value });
    }
    Ok(value)
}

/// Truncated Poisson photon-number distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonPmf {
    pub weights: Vec<f64>,
    /// `sum_{n > n_max} w_n`, summed from the far tail.
    pub tail_mass: f64,
}

impl PhotonPmf {
    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| n as f64 * w)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| (n as f64 - mean).powi(2) * w)
            .sum()
    }
}

/// Poisson weights `w_n = e^{-a} a^n / n!` for `n = 0..` until they are
/// negligible, by the recurrence `w_{n+1} = w_n a / (n + 1)`. Runs in the log
/// domain when `e^{-a}` itself underflows.
fn poisson_weights(alpha_sq: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if alpha_sq == 0.0 {
        out.push(1.0);
        return out;
    }
    // Stop once past the mode and below anything that could affect a sum.
    let floor = 1e-300f64;
    let start = (-alpha_sq).exp();
    if start.is_normal() {
        let mut w = start;
        let mut n = 0usize;
        loop {
            out.push(w);
            n += 1;
            w *= alpha_sq / n as f64;
            if n as f64 > alpha_sq && w < floor {
                break;
            }
        }
    } else {
        let ln_a = alpha_sq.ln();
        let ln_floor = floor.ln();
        let mut lw = -alpha_sq;
        let mut n = 0usize;
        loop {
            out.push(lw.exp());
            n += 1;
            lw += ln_a - (n as f64).ln();
            if n as f64 > alpha_sq && lw < ln_floor {
                break;
            }
        }
    }
    out
}

/// Mixed coherent state `e^{-|a|^2} sum_n |a|^{2n}/n! rho_1^{(x) n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedCoherentState {
    pub base: DiagonalDensityMatrix,
    pub alpha_sq: f64,
}

impl MixedCoherentState {
    pub fn new(base: DiagonalDensityMatrix, alpha_sq: f64) -> Result<Self> {
        if !(alpha_sq.is_finite() && alpha_sq >= 0.0) {
            return Err(invalid("alpha_sq", format!("must be >= 0, got {alpha_sq}")));
        }
        Ok(Self { base, alpha_sq })
    }

    /// Smallest `n_max` whose Poisson tail is below `DEFAULT_TAIL_TOL`.
    pub fn default_n_max(&self) -> usize {
        let w = poisson_weights(self.alpha_sq);
        let mut tail = 0.0;
        let mut n_max = w.len() - 1;
        for n in (0..w.len()).rev() {
            // tail == sum_{j > n} w_j
            if tail >= DEFAULT_TAIL_TOL {
                break;
            }
            n_max = n;
            tail += w[n];
        }
        n_max
    }

    pub fn photon_number_pmf(&self, n_max: usize) -> PhotonPmf {
        let mut w = poisson_weights(self.alpha_sq);
        if w.len() <= n_max {
            w.resize(n_max + 1, 0.0);
        }
        let tail_mass = w[n_max + 1..].iter().rev().sum();
        w.truncate(n_max + 1);
        PhotonPmf {
            weights: w,
            tail_mass,
        }
    }

    pub fn default_pmf(&self) -> PhotonPmf {
        self.photon_number_pmf(self.default_n_max())
    }

    /// Fixed-photon-number component `rho_1^{(x) n}`.
    pub fn sector(&self, n: u32) -> TensorPowerState {
        TensorPowerState::new(self.base.clone(), n)
    }

    pub fn sigma(&self) -> SigmaOperator {
        SigmaOperator {
            base: self.base.clone(),
            alpha_sq: self.alpha_sq,
        }
    }
}

pub fn photon_number_pmf(state: &MixedCoherentState, n_max: usize) -> PhotonPmf {
    state.photon_number_pmf(n_max)
}

/// `sigma_1 = |a|^2 rho_1`, merging photon number and spectrum into one
/// diagonal operator with trace `|a|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaOperator {
    pub base: DiagonalDensityMatrix,
    pub alpha_sq: f64,
}

impl SigmaOperator {
    pub fn diagonal(&self) -> Vec<f64> {
        self.base
            .probs()
            .iter()
            .map(|p| self.alpha_sq * p)
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Trace of the n-photon term of `e^{-tr sigma} exp_(x)(sigma)`, that is
    /// `e^{-tr sigma} tr(sigma^{(x) n}) / n!` with `tr(sigma^{(x) n}) = (tr sigma)^n`.
    pub fn sector_weight(&self, n: u32) -> f64 {
        let tr = self.trace();
        if tr == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let ln_fact: f64 = (1..=n).map(|j| (j as f64).ln()).sum();
        (-tr + n as f64 * tr.ln() - ln_fact).exp()
    }

    pub fn to_coherent_state(&self) -> MixedCoherentState {
        MixedCoherentState {
            base: self.base.clone(),
            alpha_sq: self.trace(),
        }
    }
}

pub fn sigma_operator(base: &DiagonalDensityMatrix, alpha_sq: f64) -> Result<SigmaOperator> {
    if !(alpha_sq.is_finite() && alpha_sq >= 0.0) {
        return Err(invalid("alpha_sq", format!("must be >= 0, got {alpha_sq}")));
    }
    Ok(SigmaOperator {
        base: base.clone(),
        alpha_sq,
    })
}

/// Diagnostics exported as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDiagnostics {
    pub trace: f64,
    pub purity: f64,
    pub coherence_time: Option<f64>,
    pub coherence: CoherenceTime,
    pub alpha_sq: f64,
    pub mean_photon_number: f64,
    pub photon_number_variance: f64,
    pub n_max: usize,
    pub photon_pmf: Vec<f64>,
    pub tail_mass: f64,
}

impl StateDiagnostics {
    pub fn of(state: &MixedCoherentState) -> Self {
        let pmf = state.default_pmf();
        let coherence = state.base.coherence_time();
        Self {
            trace: state.base.trace(),
            purity: state.base.purity(),
            coherence_time: coherence.value(),
            coherence,
            alpha_sq: state.alpha_sq,
            mean_photon_number: pmf.mean(),
            photon_number_variance: pmf.variance(),
            n_max: pmf.n_max(),
            photon_pmf: pmf.weights.clone(),
            tail_mass: pmf.tail_mass,
        }
    }
}
