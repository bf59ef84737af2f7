//! Mutual coherence function, the inverse Fourier transform of the PSD.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::spectral::SpectralDensity;

/// `Gamma(tau_j)` on `tau_j = j * tau_step`, `j = 0..values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceFunction {
    pub tau_step: f64,
    pub values: Vec<Complex64>,
}

impl CoherenceFunction {
    pub fn tau(&self, j: usize) -> f64 {
        j as f64 * self.tau_step
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn to_csv(&self) -> String {
        let tau: Vec<f64> = (0..self.values.len()).map(|j| self.tau(j)).collect();
        let re: Vec<f64> = self.values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.values.iter().map(|z| z.im).collect();
        let abs = self.magnitudes();
        crate::io::csv_table(&["tau", "re", "im", "abs"], &[&tau, &re, &im, &abs])
    }
}

/// `Gamma(tau) = int S(nu) exp(+i 2 pi nu tau) d nu` by trapezoid quadrature,
/// sampled on the delay grid conjugate to the frequency grid
/// (`tau_step = 1 / (count * step)`).
///
/// With trapezoid weights `Gamma(0)` is exactly the trapezoid integral of `S`,
/// and `|Gamma(tau)| <= Gamma(0)` because all weights are non-negative.
pub fn mutual_coherence(sd: &SpectralDensity, tau_count: usize) -> CoherenceFunction {
    let kernel = Kernel::new(sd);
    let values = (0..tau_count)
        .into_par_iter()
        .map(|j| kernel.gamma(j))
        .collect();
    CoherenceFunction {
        tau_step: kernel.tau_step,
        values,
    }
}

/// Trapezoid-weighted spectrum, ready for evaluating `Gamma` at single delays.
struct Kernel {
    tau_step: f64,
    weighted: Vec<(f64, f64)>,
}

impl Kernel {
    fn new(sd: &SpectralDensity) -> Self {
        let grid = sd.grid;
        let weighted = grid
            .trapezoid_weights()
            .iter()
            .zip(&sd.values)
            .enumerate()
            .map(|(i, (w, s))| (grid.nu(i), w * s))
            .collect();
        Self {
            tau_step: 1.0 / (grid.count as f64 * grid.step),
            weighted,
        }
    }

    fn gamma(&self, j: usize) -> Complex64 {
        if j == 0 {
            return Complex64::new(self.weighted.iter().map(|&(_, a)| a).sum(), 0.0);
        }
        let tau = j as f64 * self.tau_step;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(nu, a) in &self.weighted {
            // Reduce the phase to one turn before the trig call.
            let turns = (nu * tau).rem_euclid(1.0);
            let (s, c) = (2.0 * PI * turns).sin_cos();
            acc += Complex64::new(a * c, a * s);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoherenceTime {
    /// Delay at which `|Gamma| / Gamma(0)` first drops below `1/e`.
    Within { tau: f64 },
    /// `|Gamma|` stays above `1/e` over the whole delay window.
    BeyondWindow { window: f64 },
}

impl CoherenceTime {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Within { tau } => Some(tau),
            Self::BeyondWindow { .. } => None,
        }
    }
}

/// First `1/e` crossing of the normalized degree of coherence, linearly
/// interpolated between delay samples.
pub fn first_decay_crossing(gamma: &CoherenceFunction) -> CoherenceTime {
    let mags = gamma.magnitudes();
    let threshold = (-1.0f64).exp();
    let g0 = mags.first().copied().unwrap_or(0.0);
    if g0 <= 0.0 {
        return CoherenceTime::Within { tau: 0.0 };
    }
    for j in 1..mags.len() {
        let (a, b) = (mags[j - 1] / g0, mags[j] / g0);
        if b < threshold {
            let frac = (a - threshold) / (a - b);
            return CoherenceTime::Within {
                tau: gamma.tau_step * ((j - 1) as f64 + frac),
            };
        }
    }
    CoherenceTime::BeyondWindow {
        window: gamma.tau(mags.len().saturating_sub(1)),
    }
}

/// Coherence time of the source described by `sd`.
///
/// Uses the positive-frequency part of the spectrum (the analytic-signal
/// convention), so the result reflects the spectral width rather than the
/// beat between the two mirrored halves of a real signal's spectrum. The
/// delay window spans one conjugate period, `1 / step`; delays are evaluated
/// in blocks until the first crossing.
pub fn coherence_time(sd: &SpectralDensity) -> CoherenceTime {
    const BLOCK: usize = 64;
    let half = sd.non_negative_half().unwrap_or_else(|| sd.clone());
    let kernel = Kernel::new(&half);
    let window = half.grid.count;
    let mut gamma = CoherenceFunction {
        tau_step: kernel.tau_step,
        values: Vec::with_capacity(BLOCK),
    };
    let mut next = 0;
    while next < window {
        let end = (next + BLOCK).min(window);
        let block: Vec<Complex64> = (next..end)
            .into_par_iter()
            .map(|j| kernel.gamma(j))
            .collect();
        gamma.values.extend(block);
        next = end;
        if let found @ CoherenceTime::Within { .. } = first_decay_crossing(&gamma) {
            return found;
        }
    }
    first_decay_crossing(&gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use crate::spectral::normalize;

    fn gaussian_line(center: f64, sigma: f64, grid: FrequencyGrid) -> SpectralDensity {
        let v = grid
            .iter()
            .map(|nu| (-(nu - center).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        normalize(&SpectralDensity::new(grid, v).unwrap()).unwrap()
    }

    #[test]
    fn zero_delay_is_total_power() {
        let grid = FrequencyGrid::new(0.0, 0.005, 401).unwrap();
        let sd = gaussian_line(1.0, 0.05, grid);
        let g = mutual_coherence(&sd, 64);
        assert!((g.values[0].re - 1.0).abs() < 1e-9);
        assert_eq!(g.values[0].im, 0.0);
        let g0 = g.values[0].norm();
        assert!(g.values.iter().all(|z| z.norm() <= g0 * (1.0 + 1e-12)));
    }

    #[test]
    fn gaussian_line_coherence_is_gaussian() {
        let sigma = 0.05;
        let grid = FrequencyGrid::new(0.0, 0.005, 401).unwrap();
        let sd = gaussian_line(1.0, sigma, grid);
        let g = mutual_coherence(&sd, 200);
        for j in 0..60 {
            let tau = g.tau(j);
            let expected = (-2.0 * (PI * sigma * tau).powi(2)).exp();
            assert!((g.values[j].norm() - expected).abs() < 1e-8, "tau={tau}");
        }
    }

    #[test]
    fn coherence_time_of_gaussian_line() {
        let sigma = 0.05;
        let grid = FrequencyGrid::new(0.0, 0.005, 401).unwrap();
        let sd = gaussian_line(1.0, sigma, grid);
        let t = coherence_time(&sd).value().unwrap();
        let expected = 2f64.sqrt() / (2.0 * PI * sigma);
        let step = 1.0 / (401.0 * 0.005);
        assert!((t - expected).abs() < step, "{t} vs {expected}");
    }

    #[test]
    fn flat_band_never_decays_in_a_short_window() {
        // A single occupied bin: |Gamma| is constant.
        let grid = FrequencyGrid::new(0.0, 0.1, 5).unwrap();
        let sd = SpectralDensity::new(grid, vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            coherence_time(&sd),
            CoherenceTime::BeyondWindow { .. }
        ));
    }
}
