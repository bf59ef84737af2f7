use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::sampling::SampleDraw;
use crate::error::{invalid, Error, Result};
use crate::grid::FrequencyGrid;
use crate::spectral::{EnvelopeModel, LineRange, SpectralDensity};

/// Synthesized signals must span at least this many repetition periods.
pub const MIN_PERIODS: f64 = 10.0;

/// Real samples `g(t_start + k dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub t_start: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSignal {
    pub fn new(t_start: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", "must be > 0"));
        }
        if values.is_empty() {
            return Err(invalid("values", "signal has no samples"));
        }
        Ok(Self {
            t_start,
            dt,
            values,
        })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// `count * dt`.
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    /// Copy extended with zeros to the next power-of-two length.
    pub fn zero_padded(&self) -> Self {
        let n = self.values.len().next_power_of_two();
        let mut values = self.values.clone();
        values.resize(n, 0.0);
        Self { values, ..*self }
    }
}

/// Sampling of a synthesized signal, starting at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub dt: f64,
    pub count: usize,
}

/// Real pulse train of one comb realization:
/// `g(t) = sum_m |P(nu_m - nu_c)| cos(2 pi nu_m t)`, `nu_m = nu_ceo + m nu_rep`.
///
/// All components are in phase at `t = 0`, which is where the pulses peak.
pub fn synth_pulse_train(
    draw: &SampleDraw,
    env: &EnvelopeModel,
    range: LineRange,
    spec: SignalSpec,
) -> Result<TimeSignal> {
    if !(spec.dt.is_finite() && spec.dt > 0.0) || spec.count == 0 {
        return Err(invalid("signal", "need dt > 0 and count >= 1"));
    }
    let duration = spec.count as f64 * spec.dt;
    let period = 1.0 / draw.nu_rep;
    if duration < MIN_PERIODS * period {
        return Err(Error::SignalTooShort {
            duration,
            period,
            min_periods: MIN_PERIODS,
        });
    }
    let comps: Vec<(f64, f64)> = range
        .iter()
        .map(|m| {
            let nu = draw.line(m);
            (nu, env.evaluate(nu).abs())
        })
        .collect();
    let values = (0..spec.count)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * spec.dt;
            comps
                .iter()
                .map(|&(nu, a)| a * (2.0 * PI * (nu * t).rem_euclid(1.0)).cos())
                .sum()
        })
        .collect();
    TimeSignal::new(0.0, spec.dt, values)
}

fn fft(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// `|dt * DFT(g)_k|^2 / T` in natural FFT order, `T = count * dt`.
fn periodogram_fft_order(signal: &TimeSignal) -> Vec<f64> {
    let t = signal.duration();
    fft(&signal.values)
        .iter()
        .map(|z| (z * signal.dt).norm_sqr() / t)
        .collect()
}

/// Finite-duration PSD `S(nu; T) = |FT_T[g](nu)|^2 / T` with a rectangular
/// window, on the conjugate grid `k / T`, `k = -N/2 .. N/2 - 1`. Signals whose
/// length is not a power of two are zero-padded first.
pub fn periodogram(signal: &TimeSignal) -> SpectralDensity {
    let sig = signal.zero_padded();
    let n = sig.count();
    let raw = periodogram_fft_order(&sig);
    let df = 1.0 / sig.duration();
    let half = n / 2;
    let values: Vec<f64> = (0..n).map(|i| raw[(i + n - half) % n]).collect();
    SpectralDensity {
        grid: FrequencyGrid {
            start: -(half as f64) * df,
            step: df,
            count: n,
        },
        values,
        normalized: false,
    }
}

/// Circular autocorrelation `R[l] = (1/N) sum_n g[(n + l) mod N] g[n]` for
/// lags `l = 0..N`, by direct summation. Lag `l` is delay `l * dt`; negative
/// delays are `R[N - l]`.
pub fn autocorrelation(signal: &TimeSignal) -> Vec<f64> {
    let g = &signal.values;
    let n = g.len();
    (0..n)
        .into_par_iter()
        .map(|lag| {
            let (head, tail) = g.split_at(lag);
            // g[n + lag] g[n] for n < N - lag, then the wrapped part.
            let direct: f64 = tail.iter().zip(g).map(|(a, b)| a * b).sum();
            let wrapped: f64 = head.iter().zip(&g[n - lag..]).map(|(a, b)| a * b).sum();
            (direct + wrapped) / n as f64
        })
        .collect()
}

/// Relative L2 distance between the periodogram and `dt * DFT(R)`. Zero for
/// the zero signal.
pub fn wiener_khintchine_residual(signal: &TimeSignal) -> f64 {
    let sig = signal.zero_padded();
    let direct = periodogram_fft_order(&sig);
    let via_r: Vec<f64> = fft(&autocorrelation(&sig))
        .iter()
        .map(|z| z.re * sig.dt)
        .collect();
    let norm: f64 = direct.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let diff: f64 = direct
        .iter()
        .zip(&via_r)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    diff / norm
}
