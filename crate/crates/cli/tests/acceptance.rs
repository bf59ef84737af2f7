//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qcomb::lines::{analyze_lines, local_maxima};
use qcomb::oracle::{
    draw_at, epsilon_envelope, epsilon_estimate, mc_psd, synth_pulse_train,
    wiener_khintchine_residual, SignalSpec,
};
use qcomb::{
    example, n_photon_trace_moment, normalize, psd_analytic, psd_analytic_with_range,
    sigma_operator, single_photon_state, DiagonalDensityMatrix, FrequencyGrid, MixedCoherentState,
    TensorPowerState, TruncationPolicy,
};
use qcomb_cli::{run, Command, Overrides, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AUTO: TruncationPolicy = TruncationPolicy::Auto { rel_tol: 1e-8 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fig1_grid() -> FrequencyGrid {
    FrequencyGrid::new(0.0, 0.001, 10_001).unwrap()
}

fn fig1_reproduction() -> Outcome {
    let start = Instant::now();
    let (p, env) = (example::params(), example::envelope());
    let (sd, range) = psd_analytic_with_range(&p, &env, &fig1_grid(), &AUTO).unwrap();
    let fits = analyze_lines(&sd, &p, &env, range, 0.25);
    let elapsed = start.elapsed().as_secs_f64();

    let mut ok = fits.len() == 10 && fits.iter().map(|f| f.m).eq(0..10);
    let (mut pos, mut width, mut height) = (0.0f64, 0.0f64, 0.0f64);
    for f in &fits {
        pos = pos.max(f.center_offset().abs() / f.expected_width);
        width = width.max(f.width_error());
        height = height.max(f.height_ratio_error());
    }
    ok &= pos <= 0.5 && width < 0.02 && height < 0.01 && elapsed < 1.0;

    // The raw spectrum, for reference: the sloping envelope pulls maxima
    // toward the carrier, and line 9 is a shoulder rather than a maximum.
    let raw = local_maxima(&sd.values, 1e-6).len();
    let nfit = fits.len();
    let worst_raw = fits
        .iter()
        .filter_map(|f| f.raw_peak.map(|r| (r - f.nominal).abs() / f.expected_width))
        .fold(0.0, f64::max);
    outcome(
        ok,
        format!(
            "lines {nfit}, max |offset|/sigma_m {pos:.2e}, width err {width:.2e}, height/envelope^2 err {height:.2e}, \
             {elapsed:.3} s; raw maxima {raw}, max raw offset {worst_raw:.2} sigma_m"
        ),
    )
}

fn monte_carlo_gate() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let (p, env) = (example::params(), example::envelope());
    let grid = FrequencyGrid::new(0.0, 0.01, 1001).unwrap();
    let start = Instant::now();
    let a = pool.install(|| mc_psd(&p, &env, &grid, &AUTO, 100_000, 20240521).unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let b = pool.install(|| mc_psd(&p, &env, &grid, &AUTO, 100_000, 20240521).unwrap());
    let identical = a
        .estimate
        .values
        .iter()
        .zip(&b.estimate.values)
        .all(|(x, y)| x.to_bits() == y.to_bits())
        && a.l2_error_vs_analytic.to_bits() == b.l2_error_vs_analytic.to_bits();
    let l2 = a.l2_error_vs_analytic;
    outcome(
        l2 < 0.05 && identical && elapsed < 10.0,
        format!(
            "relative L2 {l2:.4}, rerun bit-identical {identical}, {elapsed:.2} s on one thread"
        ),
    )
}

fn normalization_and_trace() -> Outcome {
    let (p, env) = (example::params(), example::envelope());
    let grid = FrequencyGrid::symmetric(12.0, 4801).unwrap();
    let norm = normalize(&psd_analytic(&p, &env, &grid, &AUTO).unwrap()).unwrap();
    let integral = norm.integral();
    let rho = single_photon_state(&norm).unwrap();
    let mut worst = 0.0f64;
    for alpha_sq in [0.0, 1.0, 4.0, 25.0] {
        let sigma = sigma_operator(&rho, alpha_sq).unwrap();
        worst = worst.max((sigma.trace() - alpha_sq).abs());
    }
    let ok = (integral - 1.0).abs() <= 1e-9 && (rho.trace() - 1.0).abs() <= 1e-9 && worst <= 1e-9;
    outcome(
        ok,
        format!(
            "|int S - 1| {:.1e}, |tr rho - 1| {:.1e}, max |tr sigma - a^2| {worst:.1e}",
            (integral - 1.0).abs(),
            (rho.trace() - 1.0).abs()
        ),
    )
}

fn wiener_khintchine() -> Outcome {
    let (p, env) = (example::params(), example::envelope());
    let range = AUTO.resolve(&p, &env).unwrap();
    let spec = SignalSpec {
        dt: 1.0 / 32.0,
        count: 1 << 14,
    };
    let mut worst = 0.0f64;
    for index in 0..20 {
        let draw = draw_at(&p, 4242, index);
        let sig = synth_pulse_train(&draw, &env, range, spec).unwrap();
        worst = worst.max(wiener_khintchine_residual(&sig));
    }
    outcome(
        worst < 1e-10,
        format!(
            "20 trains of {} samples, max residual {worst:.2e}",
            spec.count
        ),
    )
}

fn epsilon_limit() -> Outcome {
    let durations = [1e-2, 1.0, 1e2, 1e3, 1e4, 1e6];
    let mut unit = true;
    for t in durations {
        for nu in [-3.0, 0.0, 0.37, 1e5] {
            unit &= epsilon_estimate(nu, nu, t).unwrap() == 1.0;
        }
    }
    let mut worst_ratio = 1.0f64;
    let mut bounded = true;
    for delta in [0.1, 1.0, 10.0] {
        for t in [1e2, 1e3, 1e4] {
            let env = epsilon_envelope(delta, t, 4001).unwrap();
            let bound = 1.0 / (PI * delta * t);
            bounded &= env <= bound * (1.0 + 1e-12);
            worst_ratio = worst_ratio.max(bound / env);
        }
    }
    let mut symmetric = true;
    let mut scaled = true;
    for (a, b) in [(0.1, 0.35), (-2.0, 5.0), (7.25, 7.0), (1e-3, 0.0)] {
        for t in [0.5, 10.0, 1234.5] {
            let e = epsilon_estimate(a, b, t).unwrap();
            symmetric &= e == epsilon_estimate(b, a, t).unwrap() && e.abs() <= 1.0;
        }
    }
    for delta in [0.1, 1.0, 10.0] {
        for t in [1e2, 1e3, 1e4] {
            for e in -8i32..=8 {
                let a = 2f64.powi(e);
                for s in [a, -a] {
                    scaled &= epsilon_estimate(s * delta, 0.0, t).unwrap()
                        == epsilon_estimate(delta, 0.0, a * t).unwrap();
                }
            }
        }
    }
    outcome(
        unit && bounded && worst_ratio <= 1.2 && symmetric && scaled,
        format!(
            "eps(nu,nu)=1 {unit}, envelope/bound within factor {worst_ratio:.3}, symmetric {symmetric}, scale exact {scaled}"
        ),
    )
}

fn kron(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![0.0; ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn dense_moment(rho: &DiagonalDensityMatrix, n: u32, k: u32) -> f64 {
    let d = rho.dim();
    if d.pow(n) <= 256 {
        let single: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| rho.element(i, j)).collect())
            .collect();
        let mut big = vec![vec![1.0]];
        for _ in 0..n {
            big = kron(&big, &single);
        }
        let mut power = big.clone();
        for _ in 1..k {
            power = matmul(&power, &big);
        }
        (0..power.len()).map(|i| power[i][i]).sum()
    } else {
        (0..d.pow(n))
            .map(|mut idx| {
                let mut v = 1.0;
                for _ in 0..n {
                    v *= rho.probs()[idx % d];
                    idx /= d;
                }
                v.powi(k as i32)
            })
            .sum()
    }
}

fn tensor_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(125);
    let mut cases: Vec<(u32, usize)> = (1..=6u32)
        .flat_map(|n| (1..=6usize).map(move |d| (n, d)))
        .collect();
    while cases.len() < 125 {
        cases.push((rng.random_range(1..=6), rng.random_range(1..=6)));
    }
    let mut worst = 0.0f64;
    for &(n, d) in &cases {
        let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 1e-3).collect();
        let grid = FrequencyGrid::new(0.0, 1.0, d).unwrap();
        let rho = DiagonalDensityMatrix::from_weights(grid, w).unwrap();
        let k = rng.random_range(1..=4);
        let got = n_photon_trace_moment(&TensorPowerState::new(rho.clone(), n), k).unwrap();
        worst = worst.max((got - dense_moment(&rho, n, k)).abs());
    }
    outcome(
        worst < 1e-12,
        format!("{} cases, max |diff| {worst:.1e}", cases.len()),
    )
}

fn poisson_statistics() -> Outcome {
    let grid = FrequencyGrid::new(0.0, 1.0, 3).unwrap();
    let rho = DiagonalDensityMatrix::from_weights(grid, vec![1.0, 2.0, 1.0]).unwrap();
    let (mut sum_err, mut mom_err, mut w0_err) = (0.0f64, 0.0f64, 0.0f64);
    for alpha_sq in [0.5, 1.0, 4.0, 10.0] {
        let pmf = MixedCoherentState::new(rho.clone(), alpha_sq)
            .unwrap()
            .default_pmf();
        sum_err = sum_err.max((pmf.weights.iter().sum::<f64>() - 1.0).abs());
        mom_err = mom_err
            .max((pmf.mean() - alpha_sq).abs())
            .max((pmf.variance() - alpha_sq).abs());
        w0_err = w0_err.max((pmf.weights[0] - (-alpha_sq).exp()).abs());
    }
    outcome(
        sum_err <= 1e-12 && mom_err <= 1e-9 && w0_err <= 1e-14,
        format!("|sum - 1| {sum_err:.1e}, moments {mom_err:.1e}, w0 {w0_err:.1e}"),
    )
}

fn circular_convolve(p: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = p.len();
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(j, k)| k * p[(i + n - j % n) % n])
                .sum()
        })
        .collect()
}

fn state_purity(cfg: &RunConfig, dir: &Path) -> f64 {
    let ov = Overrides {
        out: Some(dir.to_path_buf()),
        ..Overrides::default()
    };
    run(Command::State, cfg, &ov).unwrap();
    let text = std::fs::read_to_string(dir.join("state.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["purity"].as_f64().unwrap()
}

fn purity_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let grid = FrequencyGrid::new(0.0, 1.0, 64).unwrap();
    let mut violations = 0;
    for _ in 0..1000 {
        let p: Vec<f64> = (0..64).map(|_| rng.random::<f64>().powi(3)).collect();
        let kernel: Vec<f64> = (0..rng.random_range(1..=64))
            .map(|_| rng.random::<f64>())
            .collect();
        let before = DiagonalDensityMatrix::from_weights(grid, p).unwrap();
        let broadened = circular_convolve(before.probs(), &kernel);
        let after = DiagonalDensityMatrix::from_weights(grid, broadened).unwrap();
        if after.purity() > before.purity() * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&workspace().join("configs/state.toml")).unwrap();
    let base = state_purity(&cfg, &tmp.path().join("base"));
    cfg.sigma_ceo *= 2.0;
    let doubled = state_purity(&cfg, &tmp.path().join("doubled"));
    outcome(
        violations == 0 && doubled < base,
        format!("1000 trials, {violations} increases; purity {base:.6e} -> {doubled:.6e} with sigma_ceo doubled"),
    )
}

fn golden_files() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut ok = true;
    let mut notes = Vec::new();
    for (cmd, config, file) in [
        (Command::Fig1, "configs/fig1.toml", "fig1.csv"),
        (Command::Psd, "configs/psd.toml", "psd.csv"),
    ] {
        let cfg = RunConfig::load(&workspace().join(config)).unwrap();
        let mut runs = Vec::new();
        for k in 0..2 {
            let dir = tmp.path().join(format!("{file}-{k}"));
            let ov = Overrides {
                out: Some(dir.clone()),
                ..Overrides::default()
            };
            run(cmd, &cfg, &ov).unwrap();
            runs.push(std::fs::read(dir.join(file)).unwrap());
        }
        let reference = std::fs::read(golden.join(file)).unwrap();
        let same = runs[0] == runs[1];
        let matches = runs[0] == reference;
        ok &= same && matches;
        notes.push(format!(
            "{file}: reruns identical {same}, matches golden {matches}"
        ));
    }
    outcome(ok, notes.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("worked-example spectrum", fig1_reproduction),
        ("Monte Carlo oracle gate", monte_carlo_gate),
        ("normalization and trace", normalization_and_trace),
        ("Wiener-Khintchine identity", wiener_khintchine),
        ("epsilon-function limit", epsilon_limit),
        ("tensor-power oracle", tensor_oracle),
        ("Poisson photon statistics", poisson_statistics),
        ("purity monotonicity", purity_monotonicity),
        ("golden CSV files", golden_files),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
