use rayon::prelude::*;
use serde::Serialize;

use super::sampling::draw_at;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::spectral::{
    psd_analytic_with_range, CombParams, EnvelopeModel, LineRange, SpectralDensity,
    TruncationPolicy,
};

/// Draws per partial histogram. Partial histograms are merged in ascending
/// chunk order whether or not they were filled in parallel.
pub const CHUNK_DRAWS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulation {
    Sequential,
    Parallel,
}

/// Monte Carlo estimate of the PSD and its distance from the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub estimate: SpectralDensity,
    pub n_samples: u64,
    pub seed: u64,
    /// `max |estimate - analytic| / max analytic` over `nu >= 0`.
    pub sup_error_vs_analytic: f64,
    /// `||estimate - analytic||_2 / ||analytic||_2` over `nu >= 0`.
    pub l2_error_vs_analytic: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    n_samples: u64,
    seed: u64,
    sup_error: f64,
    l2_error: f64,
    grid: &'a FrequencyGrid,
}

impl OracleReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ReportJson {
            n_samples: self.n_samples,
            seed: self.seed,
            sup_error: self.sup_error_vs_analytic,
            l2_error: self.l2_error_vs_analytic,
            grid: &self.estimate.grid,
        })
        .expect("report is plain data")
    }
}

fn fill_chunk(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    range: LineRange,
    seed: u64,
    draws: std::ops::Range<u64>,
) -> Vec<f64> {
    let mut hist = vec![0.0; grid.count];
    for index in draws {
        let draw = draw_at(params, seed, index);
        for m in range.iter() {
            let nu = draw.line(m);
            let weight = 0.25 * env.power_at_offset(nu - params.nu_c);
            if let Some(i) = grid.bin_index(nu) {
                hist[i] += weight;
            }
            if let Some(i) = grid.bin_index(-nu) {
                hist[i] += weight;
            }
        }
    }
    hist
}

/// Ensemble average of line depositions: each draw puts weight
/// `|P(nu_line - nu_c)|^2 / 4` into the cell containing every line
/// `±(nu_ceo + m nu_rep)`, and the total is divided by `n_samples * step`.
pub fn mc_estimate(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    range: LineRange,
    n_samples: u64,
    seed: u64,
    mode: Accumulation,
) -> SpectralDensity {
    let chunks: Vec<std::ops::Range<u64>> = (0..n_samples.div_ceil(CHUNK_DRAWS))
        .map(|c| c * CHUNK_DRAWS..((c + 1) * CHUNK_DRAWS).min(n_samples))
        .collect();
    let fill = |r: &std::ops::Range<u64>| fill_chunk(params, env, grid, range, seed, r.clone());
    let partials: Vec<Vec<f64>> = match mode {
        Accumulation::Sequential => chunks.iter().map(fill).collect(),
        Accumulation::Parallel => chunks.par_iter().map(fill).collect(),
    };
    let mut total = vec![0.0; grid.count];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    let scale = 1.0 / (n_samples.max(1) as f64 * grid.step);
    for t in &mut total {
        *t *= scale;
    }
    SpectralDensity {
        grid: *grid,
        values: total,
        normalized: false,
    }
}

/// Sup and relative-L2 distances between two densities over `nu >= 0`.
pub fn compare_positive_half(
    estimate: &SpectralDensity,
    analytic: &SpectralDensity,
) -> Result<(f64, f64)> {
    if !estimate.grid.matches(&analytic.grid, 1e-12) {
        return Err(Error::GridMismatch(format!(
            "estimate {:?} vs analytic {:?}",
            estimate.grid, analytic.grid
        )));
    }
    let (mut sup, mut peak, mut diff2, mut norm2) = (0.0f64, 0.0f64, 0.0, 0.0);
    for (i, (e, a)) in estimate.values.iter().zip(&analytic.values).enumerate() {
        if analytic.grid.nu(i) < 0.0 {
            continue;
        }
        let d = e - a;
        sup = sup.max(d.abs());
        peak = peak.max(*a);
        diff2 += d * d;
        norm2 += a * a;
    }
    if norm2 == 0.0 {
        return Err(Error::ZeroIntegral(0.0));
    }
    Ok((sup / peak, (diff2 / norm2).sqrt()))
}

/// Runs the Monte Carlo oracle and scores it against the closed form on the
/// same grid and line range.
pub fn mc_psd(
    params: &CombParams,
    env: &EnvelopeModel,
    grid: &FrequencyGrid,
    trunc: &TruncationPolicy,
    n_samples: u64,
    seed: u64,
) -> Result<OracleReport> {
    if n_samples == 0 {
        return Err(crate::error::invalid("oracle.n_samples", "must be >= 1"));
    }
    let (analytic, range) = psd_analytic_with_range(params, env, grid, trunc)?;
    let estimate = mc_estimate(
        params,
        env,
        grid,
        range,
        n_samples,
        seed,
        Accumulation::Parallel,
    );
    let (sup, l2) = compare_positive_half(&estimate, &analytic)?;
    Ok(OracleReport {
        estimate,
        n_samples,
        seed,
        sup_error_vs_analytic: sup,
        l2_error_vs_analytic: l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_comb_lands_in_line_bins() {
        let p = CombParams::new(0.3, 1.0, 0.0, 0.0, 5.0).unwrap();
        let env = EnvelopeModel::new(5.0, 2.0, 1.0).unwrap();
        let grid = FrequencyGrid::new(-10.0, 0.01, 2001).unwrap();
        let range = LineRange::new(-2, 12).unwrap();
        let est = mc_estimate(&p, &env, &grid, range, 10, 3, Accumulation::Sequential);
        for (i, v) in est.values.iter().enumerate() {
            let nu = grid.nu(i);
            let on_line = range.iter().any(|m| {
                let c = p.line_center(m);
                grid.bin_index(c) == Some(i) || grid.bin_index(-c) == Some(i)
            });
            if on_line {
                assert!(*v > 0.0, "missing weight at {nu}");
            } else {
                assert_eq!(*v, 0.0, "unexpected weight at {nu}");
            }
        }
        let i = grid.bin_index(5.3).unwrap();
        let expected = 0.25 * env.power_at_offset(0.3) / grid.step;
        assert!((est.values[i] - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let p = CombParams::new(0.3, 1.0, 0.05, 0.03, 5.0).unwrap();
        let env = EnvelopeModel::new(5.0, 2.0, 1.0).unwrap();
        let grid = FrequencyGrid::new(-12.0, 0.01, 2401).unwrap();
        let range = LineRange::new(-2, 12).unwrap();
        let a = mc_estimate(
            &p,
            &env,
            &grid,
            range,
            3 * CHUNK_DRAWS + 17,
            11,
            Accumulation::Sequential,
        );
        let b = mc_estimate(
            &p,
            &env,
            &grid,
            range,
            3 * CHUNK_DRAWS + 17,
            11,
            Accumulation::Parallel,
        );
        assert!(a
            .values
            .iter()
            .zip(&b.values)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g1 = FrequencyGrid::new(0.0, 0.01, 100).unwrap();
        let g2 = FrequencyGrid::new(0.0, 0.02, 100).unwrap();
        let a = SpectralDensity::new(g1, vec![1.0; 100]).unwrap();
        let b = SpectralDensity::new(g2, vec![1.0; 100]).unwrap();
        assert!(matches!(
            compare_positive_half(&a, &b),
            Err(Error::GridMismatch(_))
        ));
    }
}
