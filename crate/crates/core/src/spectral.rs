//! Closed-form ensemble-averaged power spectral density of a frequency comb
//! whose offset and repetition frequencies are independent Gaussian variables.
//!
//! Line `m` of the positive half sits at `mu_ceo + m mu_rep` and is a normal
//! density of variance `sigma_ceo^2 + m^2 sigma_rep^2`, weighted by the squared
//! envelope. The negative half mirrors it, and both halves carry a factor 1/4:
//!
//! ```text
//! S(nu) = 1/4 |P(nu - nu_c)|^2 sum_m Q_m(nu) + 1/4 |P(nu + nu_c)|^2 sum_m Q_m(-nu)
//! ```
//!
//! The dimension parameter that appears when squared line functions are
//! replaced by delta functions is fixed to 1 (it is absorbed into `P`).

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::FrequencyGrid;

/// Means and standard deviations of the carrier-envelope offset and
/// repetition frequencies, plus the carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombParams {
    pub mu_ceo: f64,
    pub mu_rep: f64,
    pub sigma_ceo: f64,
    pub sigma_rep: f64,
    pub nu_c: f64,
}

impl CombParams {
    pub fn new(
        mu_ceo: f64,
        mu_rep: f64,
        sigma_ceo: f64,
        sigma_rep: f64,
        nu_c: f64,
    ) -> Result<Self> {
        let p = Self {
            mu_ceo,
            mu_rep,
            sigma_ceo,
            sigma_rep,
            nu_c,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu_ceo,
            self.mu_rep,
            self.sigma_ceo,
            self.sigma_rep,
            self.nu_c,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(invalid("comb", "all comb parameters must be finite"));
        }
        if self.mu_rep <= 0.0 {
            return Err(invalid(
                "mu_rep",
                format!("must be > 0, got {}", self.mu_rep),
            ));
        }
        if !(self.mu_ceo > 0.0 && self.mu_ceo < self.mu_rep) {
            return Err(invalid(
                "mu_ceo",
                format!(
                    "must satisfy 0 < mu_ceo < mu_rep, got {} (mu_rep = {})",
                    self.mu_ceo, self.mu_rep
                ),
            ));
        }
        if self.sigma_ceo < 0.0 {
            return Err(invalid("sigma_ceo", "must be >= 0"));
        }
        if self.sigma_rep < 0.0 {
            return Err(invalid("sigma_rep", "must be >= 0"));
        }
        Ok(())
    }

    /// Nominal position `mu_ceo + m mu_rep` of positive-half line `m`.
    #[inline]
    pub fn line_center(&self, m: i64) -> f64 {
        self.mu_ceo + m as f64 * self.mu_rep
    }

    /// `sigma_ceo^2 + m^2 sigma_rep^2`.
    #[inline]
    pub fn line_variance(&self, m: i64) -> f64 {
        let mf = m as f64;
        self.sigma_ceo * self.sigma_ceo + mf * mf * self.sigma_rep * self.sigma_rep
    }

    #[inline]
    pub fn line_width(&self, m: i64) -> f64 {
        self.line_variance(m).sqrt()
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma_ceo == 0.0 && self.sigma_rep == 0.0
    }
}

/// Gaussian spectral envelope `P(nu - nu_c) = A exp(-(nu - nu_c)^2 / B^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeModel {
    pub nu_c: f64,
    pub bandwidth: f64,
    pub amplitude_scale: f64,
}

impl EnvelopeModel {
    pub fn new(nu_c: f64, bandwidth: f64, amplitude_scale: f64) -> Result<Self> {
        let e = Self {
            nu_c,
            bandwidth,
            amplitude_scale,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.nu_c.is_finite() {
            return Err(invalid("nu_c", "must be finite"));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(invalid(
                "bandwidth_B",
                format!("must be > 0, got {}", self.bandwidth),
            ));
        }
        if !(self.amplitude_scale.is_finite() && self.amplitude_scale > 0.0) {
            return Err(invalid("amplitude_scale", "must be > 0"));
        }
        Ok(())
    }

    /// Envelope amplitude at absolute frequency `nu`.
    #[inline]
    pub fn evaluate(&self, nu: f64) -> f64 {
        self.at_offset(nu - self.nu_c)
    }

    /// Envelope amplitude at offset `d = nu - nu_c`. Even in `d`.
    #[inline]
    pub fn at_offset(&self, d: f64) -> f64 {
        self.amplitude_scale * (-(d * d) / (self.bandwidth * self.bandwidth)).exp()
    }

    /// `|P(d)|^2`.
    #[inline]
    pub fn power_at_offset(&self, d: f64) -> f64 {
        let a = self.at_offset(d);
        a * a
    }
}

pub fn envelope_eval(env: &EnvelopeModel, nu: f64) -> f64 {
    env.evaluate(nu)
}

/// Spectral density sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl SpectralDensity {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.count {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", grid.count, values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(
                "values",
                format!("spectral density must be finite and >= 0, found {v}"),
            ));
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
        })
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            normalized: false,
        }
    }

    /// Samples with `nu >= 0`, on their own grid.
    pub fn non_negative_half(&self) -> Option<Self> {
        let first = (0..self.grid.count).find(|&i| self.grid.nu(i) >= 0.0)?;
        let grid = FrequencyGrid {
            start: self.grid.nu(first),
            step: self.grid.step,
            count: self.grid.count - first,
        };
        Some(Self {
            grid,
            values: self.values[first..].to_vec(),
            normalized: false,
        })
    }

    pub fn to_csv(&self) -> String {
        let nu: Vec<f64> = self.grid.iter().collect();
        crate::io::csv_table(&["nu", "S"], &[&nu, &self.values])
    }
}

/// Unit-integral copy of `sd` under the trapezoid rule.
pub fn normalize(sd: &SpectralDensity) -> Result<SpectralDensity> {
    let integral = sd.integral();
    if !(integral.is_finite() && integral > 0.0) {
        return Err(Error::ZeroIntegral(integral));
    }
    let mut out = sd.scaled(1.0 / integral);
    out.normalized = true;
    Ok(out)
}

/// Normal density of line `m`, `Q_m(nu)`.
pub fn line_component(params: &CombParams, m: i64, nu: f64) -> Result<f64> {
    let var = params.line_variance(m);
    if var <= 0.0 {
        return Err(Error::DegenerateVariance { m });
    }
    let d = nu - params.line_center(m);
    Ok((-(d * d) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
}

/// Contiguous range of comb indices `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRange {
    pub m_min: i64,
    pub m_max: i64,
}

impl LineRange {
    pub fn new(m_min: i64, m_max: i64) -> Result<Self> {
        if m_min > m_max {
            return Err(invalid(
                "trunc",
                format!("empty line range [{m_min}, {m_max}]"),
            ));
        }
        Ok(Self { m_min, m_max })
    }

    pub fn iter(&self) -> RangeInclusive<i64> {
        self.m_min..=self.m_max
    }

    pub fn len(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: i64) -> bool {
        self.iter().contains(&m)
    }

    pub fn widened(&self, below: i64, above: i64) -> Self {
        Self {
            m_min: self.m_min - below,
            m_max: self.m_max + above,
        }
    }
}

/// How the infinite sum over comb lines is cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TruncationPolicy {
    /// Envelope-threshold range from [`truncation_bounds`].
    Auto { rel_tol: f64 },
    /// Caller-chosen range, checked against the same threshold.
    Fixed { range: LineRange, rel_tol: f64 },
}

impl TruncationPolicy {
    pub fn rel_tol(&self) -> f64 {
        match *self {
            Self::Auto { rel_tol } | Self::Fixed { rel_tol, .. } => rel_tol,
        }
    }

    pub fn resolve(&self, params: &CombParams, env: &EnvelopeModel) -> Result<LineRange> {
        check_rel_tol(self.rel_tol())?;
        match *self {
            Self::Auto { rel_tol } => truncation_bounds(params, env, rel_tol),
            Self::Fixed { range, rel_tol } => {
                check_fixed_range(params, env, range, rel_tol)?;
                Ok(range)
            }
        }
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol < 1.0 {
        Ok(())
    } else {
        Err(invalid(
            "trunc.rel_tol",
            format!("must lie in (0, 1), got {rel_tol}"),
        ))
    }
}

#[inline]
fn line_weight(params: &CombParams, env: &EnvelopeModel, m: i64) -> f64 {
    env.power_at_offset(params.line_center(m) - params.nu_c)
}

/// Index of the line closest to the envelope peak. The Gaussian envelope
/// makes the weights unimodal in `m`.
fn peak_line(params: &CombParams, env: &EnvelopeModel) -> i64 {
    let guess = ((params.nu_c - params.mu_ceo) / params.mu_rep).round() as i64;
    (guess - 1..=guess + 1)
        .max_by(|&a, &b| {
            line_weight(params, env, a)
                .partial_cmp(&line_weight(params, env, b))
                .unwrap()
                .then(b.cmp(&a))
        })
        .unwrap()
}

fn safety_margin(params: &CombParams, m: i64) -> i64 {
    (4.0 * params.line_width(m) / params.mu_rep).ceil() as i64
}

/// Smallest contiguous range of lines whose envelope weight reaches
/// `rel_tol` times the strongest line, widened by `ceil(4 sigma_m / mu_rep)`
/// lines on each side.
pub fn truncation_bounds(
    params: &CombParams,
    env: &EnvelopeModel,
    rel_tol: f64,
) -> Result<LineRange> {
    params.validate()?;
    env.validate()?;
    check_rel_tol(rel_tol)?;
    let peak = peak_line(params, env);
    let threshold = rel_tol * line_weight(params, env, peak);
    let mut lo = peak;
    while line_weight(params, env, lo - 1) >= threshold {
        lo -= 1;
    }
    let mut hi = peak;
    while line_weight(params, env, hi + 1) >= threshold {
        hi += 1;
    }
    Ok(LineRange {
        m_min: lo,
        m_max: hi,
    }
    .widened(safety_margin(params, lo), safety_margin(params, hi)))
}

fn check_fixed_range(
    params: &CombParams,
    env: &EnvelopeModel,
    range: LineRange,
    rel_tol: f64,
) -> Result<()> {
    let peak = peak_line(params, env).clamp(range.m_min, range.m_max);
    let max_included = line_weight(params, env, peak);
    for m in [range.m_min - 1, range.m_max + 1] {
        let w = line_weight(params, env, m) / max_included;
        if w >= rel_tol {
            return Err(Error::TruncationTooNarrow {
                m_min: range.m_min,
                m_max: range.m_max,
                m,
                weight: w,
                rel_tol,
            });
        }
    }
    Ok(())
}

/// Precomputed Gaussian line shapes for a fixed range.
struct LineSet {
    centers: Vec<f64>,
    inv_two_var: Vec<f64>,
    prefactors: Vec<f64>,
}

impl LineSet {
    fn new(params: &CombParams, range: LineRange) -> Result<Self> {
        let mut set = LineSet {
            centers: Vec::with_capacity(range.len()),
            inv_two_var: Vec::with_capacity(range.len()),
            prefactors: Vec::with_capacity(range.len()),
        };
        for m in range.iter() {
            let var = params.line_variance(m);
            if var <= 0.0 {
                return Err(Error::DegenerateVariance { m });
            }
            set.centers.push(params.line_center(m));
            set.inv_two_var.push(1.0 / (2.0 * var));
            set.prefactors.push(1.0 / (2.0 * PI * var).sqrt());
        }
        Ok(set)
    }

    /// `sum_m Q_m(nu)`, ascending in `m`.
    #[inline]
    fn sum(&self, nu: f64) -> f64 {
        let mut acc = 0.0;
        for ((c, k), a) in self
            .centers
            .iter()
            .zip(&self.inv_two_var)
            .zip(&self.prefactors)
        {
            let d = nu - c;
            acc += a * (-(d * d) * k).exp();
        }
        acc
    }
}

/// Requires `step <= sigma_min / 4` over the lines in `range`.
pub fn check_resolution(params: &CombParams, range: LineRange, grid: &FrequencyGrid) -> Result<()> {
    let sigma = range
        .iter()
        .map(|m| params.line_width(m))
        .fold(f64::INFINITY, f64::min);
    let limit = sigma / 4.0;
    if grid.step > limit {
        return Err(Error::GridTooCoarse {
            step: grid.step,
            sigma,
            limit,
        });
    }
    Ok(())
}

struct Prepared {
    lines: LineSet,
}

fn prepare(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    trunc: &TruncationPolicy,
) -> Result<(LineRange, Prepared)> {
    params.validate()?;
    env.validate()?;
    grid.validate()?;
    let range = trunc.resolve(params, env)?;
    let lines = LineSet::new(params, range)?;
    check_resolution(params, range, grid)?;
    Ok((range, Prepared { lines }))
}

/// Full two-sided ensemble-averaged PSD on `grid` (raw scale, envelope peak
/// amplitude as given). Returns the line range that was summed.
pub fn psd_analytic_with_range(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    trunc: &TruncationPolicy,
) -> Result<(SpectralDensity, LineRange)> {
    let (range, prep) = prepare(params, env, grid, trunc)?;
    let values: Vec<f64> = (0..grid.count)
        .into_par_iter()
        .map(|i| {
            let nu = grid.nu(i);
            let pos = env.power_at_offset(nu - params.nu_c) * prep.lines.sum(nu);
            let neg = env.power_at_offset(nu + params.nu_c) * prep.lines.sum(-nu);
            0.25 * (pos + neg)
        })
        .collect();
    Ok((
        SpectralDensity {
            grid: *grid,
            values,
            normalized: false,
        },
        range,
    ))
}

pub fn psd_analytic(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    trunc: &TruncationPolicy,
) -> Result<SpectralDensity> {
    psd_analytic_with_range(params, env, grid, trunc).map(|(sd, _)| sd)
}

/// One-sided view: four times the positive-frequency term, so the line
/// heights compare directly against a unit-peak envelope.
pub fn psd_one_sided(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    trunc: &TruncationPolicy,
) -> Result<SpectralDensity> {
    let (_, prep) = prepare(params, env, grid, trunc)?;
    let values: Vec<f64> = (0..grid.count)
        .into_par_iter()
        .map(|i| {
            let nu = grid.nu(i);
            env.power_at_offset(nu - params.nu_c) * prep.lines.sum(nu)
        })
        .collect();
    Ok(SpectralDensity {
        grid: *grid,
        values,
        normalized: false,
    })
}

/// A comb line of zero width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaLine {
    pub m: i64,
    pub nu: f64,
    pub weight: f64,
}

/// Spectrum of a comb with deterministic `nu_ceo` and `nu_rep`: lines at
/// `±(mu_ceo + m mu_rep)` carrying weight `|P|^2 / 4` each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaComb {
    pub lines: Vec<DeltaLine>,
}

impl DeltaComb {
    pub fn new(params: &CombParams, env: &EnvelopeModel, range: LineRange) -> Self {
        let mut lines = Vec::with_capacity(2 * range.len());
        for m in range.iter() {
            let nu = params.line_center(m);
            let weight = 0.25 * env.power_at_offset(nu - params.nu_c);
            lines.push(DeltaLine { m, nu: -nu, weight });
            lines.push(DeltaLine { m, nu, weight });
        }
        lines.sort_by(|a, b| a.nu.partial_cmp(&b.nu).unwrap());
        Self { lines }
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|l| l.weight).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.total_weight();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ZeroIntegral(total));
        }
        Ok(Self {
            lines: self
                .lines
                .iter()
                .map(|l| DeltaLine {
                    weight: l.weight / total,
                    ..*l
                })
                .collect(),
        })
    }
}

/// Sampled density, or the delta-comb form when both variances vanish.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Sampled(SpectralDensity),
    Lines(DeltaComb),
}

pub fn spectrum(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    trunc: &TruncationPolicy,
) -> Result<Spectrum> {
    if params.is_deterministic() {
        params.validate()?;
        env.validate()?;
        let range = trunc.resolve(params, env)?;
        return Ok(Spectrum::Lines(DeltaComb::new(params, env, range)));
    }
    psd_analytic(params, env, grid, trunc).map(Spectrum::Sampled)
}
