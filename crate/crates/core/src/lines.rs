//! Peak finding and Gaussian line-shape fitting on sampled spectra.

use std::f64::consts::PI;

use serde::Serialize;

use crate::spectral::{CombParams, EnvelopeModel, LineRange, SpectralDensity};

/// Indices of strict-left local maxima whose value reaches `min_rel` times the
/// global maximum.
pub fn local_maxima(values: &[f64], min_rel: f64) -> Vec<usize> {
    let max = values.iter().copied().fold(0.0, f64::max);
    if values.len() < 3 || max <= 0.0 {
        return Vec::new();
    }
    (1..values.len() - 1)
        .filter(|&i| {
            values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] >= min_rel * max
        })
        .collect()
}

/// Vertex of the parabola through three equally spaced samples, as an offset
/// in units of the spacing from the middle sample.
pub fn parabolic_offset(left: f64, mid: f64, right: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if denom == 0.0 {
        0.0
    } else {
        0.5 * (left - right) / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub center: f64,
    pub sigma: f64,
    pub height: f64,
}

/// Least-squares fit of `ln y` to a quadratic (Caruana's method). Needs at
/// least three strictly positive samples and a concave result.
pub fn fit_gaussian(xs: &[f64], ys: &[f64]) -> Option<GaussianFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0 && y.is_finite())
        .map(|(x, y)| (*x, y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let x0 = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    // Normal equations for ln y = a + b u + c u^2, u = x - x0.
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, ly) in &pts {
        let u = x - x0;
        let mut up = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += up;
            if k < 3 {
                t[k] += up * ly;
            }
            up *= u;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let [a, b, c] = solve3(m, t)?;
    if c.is_nan() || c >= 0.0 {
        return None;
    }
    let u_peak = -b / (2.0 * c);
    Some(GaussianFit {
        center: x0 + u_peak,
        sigma: (-1.0 / (2.0 * c)).sqrt(),
        height: (a + b * u_peak + c * u_peak * u_peak).exp(),
    })
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

/// Measured properties of one positive-half comb line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub m: i64,
    pub nominal: f64,
    pub expected_width: f64,
    /// Local maximum of the raw spectrum nearest the line, refined by a
    /// three-point parabola. `None` if the line shows no local maximum.
    pub raw_peak: Option<f64>,
    /// Raw spectral value at `raw_peak` (sample maximum).
    pub raw_height: Option<f64>,
    /// Gaussian fit to `S / |P|^2` around the line.
    pub fit: GaussianFit,
    /// `line_scale / sqrt(2 pi sigma_m^2)`.
    pub expected_height_ratio: f64,
}

impl LineFit {
    pub fn width_error(&self) -> f64 {
        (self.fit.sigma - self.expected_width).abs() / self.expected_width
    }

    pub fn height_ratio_error(&self) -> f64 {
        (self.fit.height - self.expected_height_ratio).abs() / self.expected_height_ratio
    }

    pub fn center_offset(&self) -> f64 {
        self.fit.center - self.nominal
    }
}

impl GaussianFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.height * (-(x - self.center).powi(2) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

const BACKFIT_SWEEPS: usize = 200;
const BACKFIT_TOL: f64 = 1e-13;

struct Component {
    m: i64,
    nominal: f64,
    sigma: f64,
    /// Sample indices into the compensated profile used to fit this line.
    window: Vec<usize>,
    fit: Option<GaussianFit>,
}

/// Fits every positive-half line in `range` whose nominal position lies on
/// the non-negative part of the grid.
///
/// The squared envelope is divided out before fitting, so position, width
/// and height refer to the line shape itself rather than to its product with
/// the sloping envelope (which pulls raw maxima toward the carrier). The
/// compensated profile is a sum of Gaussians, and broad neighbouring lines
/// overlap, so all lines are fitted together by backfitting: each line is
/// refitted on samples within half a line width of its nominal position after
/// subtracting the current fits of all other lines, until the fits stop
/// changing. Lines centred just past the grid edge take part through their
/// visible tails but are not reported.
///
/// `line_scale` is the factor multiplying each line in `sd`: 1/4 for the full
/// two-sided PSD, 1 for the one-sided view.
pub fn analyze_lines(
    sd: &SpectralDensity,
    params: &CombParams,
    env: &EnvelopeModel,
    range: LineRange,
    line_scale: f64,
) -> Vec<LineFit> {
    let grid = sd.grid;
    let (lo, hi) = (grid.start.max(0.0), grid.end());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, nu) in grid.iter().enumerate() {
        let p2 = env.power_at_offset(nu - params.nu_c);
        if nu >= lo && p2 > 0.0 {
            xs.push(nu);
            ys.push(sd.values[i] / p2);
        }
    }

    let mut comps: Vec<Component> = range
        .iter()
        .filter_map(|m| {
            let nominal = params.line_center(m);
            let sigma = params.line_width(m);
            let on_grid = nominal >= lo && nominal <= hi;
            let half = if on_grid {
                (0.5 * sigma).max(3.0 * grid.step)
            } else {
                2.0 * sigma
            };
            let window: Vec<usize> = (0..xs.len())
                .filter(|&i| (xs[i] - nominal).abs() <= half)
                .collect();
            (window.len() >= 3).then_some(Component {
                m,
                nominal,
                sigma,
                window,
                fit: None,
            })
        })
        .collect();

    for _ in 0..BACKFIT_SWEEPS {
        let mut change = 0.0f64;
        for k in 0..comps.len() {
            let (wx, wy): (Vec<f64>, Vec<f64>) = comps[k]
                .window
                .iter()
                .map(|&i| {
                    let others: f64 = comps
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .filter_map(|(_, c)| c.fit.map(|f| f.eval(xs[i])))
                        .sum();
                    (xs[i], ys[i] - others)
                })
                .unzip();
            let new = fit_gaussian(&wx, &wy);
            change = change.max(match (comps[k].fit, new) {
                (Some(a), Some(b)) => ((a.center - b.center).abs() / b.sigma)
                    .max((a.sigma - b.sigma).abs() / b.sigma)
                    .max((a.height - b.height).abs() / b.height),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            });
            comps[k].fit = new;
        }
        if change < BACKFIT_TOL {
            break;
        }
    }

    comps
        .iter()
        .filter(|c| c.nominal >= lo && c.nominal <= hi)
        .filter_map(|c| {
            let fit = c.fit?;
            let (raw_peak, raw_height) = raw_maximum_near(sd, c.nominal, 0.5 * params.mu_rep);
            Some(LineFit {
                m: c.m,
                nominal: c.nominal,
                expected_width: c.sigma,
                raw_peak,
                raw_height,
                fit,
                expected_height_ratio: line_scale / (2.0 * PI * c.sigma * c.sigma).sqrt(),
            })
        })
        .collect()
}

fn raw_maximum_near(
    sd: &SpectralDensity,
    nominal: f64,
    half_window: f64,
) -> (Option<f64>, Option<f64>) {
    let grid = sd.grid;
    let v = &sd.values;
    let best = (1..grid.count.saturating_sub(1))
        .filter(|&i| (grid.nu(i) - nominal).abs() <= half_window)
        .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
        .max_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    match best {
        Some(i) => {
            let off = parabolic_offset(v[i - 1], v[i], v[i + 1]);
            (Some(grid.nu(i) + off * grid.step), Some(v[i]))
        }
        None => (None, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_gaussian() {
        let xs: Vec<f64> = (0..41).map(|i| 2.0 + 0.01 * i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 3.5 * (-(x - 2.23f64).powi(2) / (2.0 * 0.07f64.powi(2))).exp())
            .collect();
        let f = fit_gaussian(&xs, &ys).unwrap();
        assert!((f.center - 2.23).abs() < 1e-10);
        assert!((f.sigma - 0.07).abs() < 1e-10);
        assert!((f.height - 3.5).abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_convex_data() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.5, 0.5, 1.0];
        assert!(fit_gaussian(&xs, &ys).is_none());
        assert!(fit_gaussian(&xs[..2], &ys[..2]).is_none());
    }

    #[test]
    fn backfitting_separates_overlapping_lines() {
        // Two broad lines one unit apart, each 1/4 of a unit wide.
        let params = CombParams::new(0.5, 1.0, 0.25, 0.0, 1.0).unwrap();
        let env = EnvelopeModel::new(1.0, 1e6, 1.0).unwrap();
        let grid = crate::grid::FrequencyGrid::new(0.0, 0.002, 1001).unwrap();
        let line =
            |c: f64, x: f64| (-(x - c).powi(2) / (2.0 * 0.0625)).exp() / (2.0 * PI * 0.0625).sqrt();
        let v = grid.iter().map(|x| line(0.5, x) + line(1.5, x)).collect();
        let sd = SpectralDensity::new(grid, v).unwrap();
        let fits = analyze_lines(&sd, &params, &env, LineRange::new(0, 1).unwrap(), 1.0);
        assert_eq!(fits.len(), 2);
        for f in fits {
            assert!(f.width_error() < 1e-6, "m={} sigma={}", f.m, f.fit.sigma);
            assert!(f.center_offset().abs() < 1e-6);
            assert!(f.height_ratio_error() < 1e-6);
        }
    }

    #[test]
    fn maxima_threshold() {
        let v = [0.0, 1.0, 0.0, 0.001, 0.0, 2.0, 2.0, 0.0];
        assert_eq!(local_maxima(&v, 0.0), vec![1, 3, 5]);
        assert_eq!(local_maxima(&v, 0.01), vec![1, 5]);
    }

    #[test]
    fn parabola_vertex() {
        // y = -(x - 0.25)^2 sampled at -1, 0, 1
        let f = |x: f64| -(x - 0.25f64).powi(2);
        assert!((parabolic_offset(f(-1.0), f(0.0), f(1.0)) - 0.25).abs() < 1e-15);
    }
}
