use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use qcomb::lines::analyze_lines;
use qcomb::oracle::mc_psd;
use qcomb::{
    coherence_time, mutual_coherence, normalize, psd_analytic, psd_analytic_with_range,
    psd_one_sided, single_photon_state, MixedCoherentState, StateDiagnostics,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::svg;

/// Relative L2 threshold of the oracle gate.
pub const GATE_L2: f64 = 0.05;
/// Runs with fewer draws are reported without applying the gate.
pub const GATE_MIN_SAMPLES: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Psd,
    Oracle,
    State,
    Fig1,
    Coherence,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub formats: Vec<Format>,
}

struct Sink {
    dir: PathBuf,
    formats: BTreeSet<Format>,
    written: Vec<PathBuf>,
}

impl Sink {
    fn new(cfg: &RunConfig, ov: &Overrides) -> Self {
        let formats = if ov.formats.is_empty() {
            cfg.output.formats.iter().copied().collect()
        } else {
            ov.formats.iter().copied().collect()
        };
        Self {
            dir: ov
                .out
                .clone()
                .unwrap_or_else(|| cfg.output.directory.clone()),
            formats,
            written: Vec::new(),
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn put(
        &mut self,
        format: Format,
        name: &str,
        contents: impl FnOnce() -> String,
    ) -> Result<(), CliError> {
        if !self.wants(format) {
            return Ok(());
        }
        fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        fs::write(&path, contents())
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn put_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        self.put(Format::Json, name, || {
            let mut s = serde_json::to_string_pretty(value).expect("plain data");
            s.push('\n');
            s
        })
    }

    fn finish(self, available: &[Format]) -> Result<Vec<PathBuf>, CliError> {
        if self.written.is_empty() {
            return Err(CliError::validation(
                "output.formats",
                format!("this command writes only {available:?}"),
            ));
        }
        Ok(self.written)
    }
}

/// Runs one command and returns the files it wrote. A failed oracle gate is
/// reported as an error after its files are written.
pub fn run(cmd: Command, cfg: &RunConfig, ov: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let mut sink = Sink::new(cfg, ov);
    match cmd {
        Command::Psd => psd(cfg, &mut sink)?,
        Command::Oracle => {
            let gate = oracle(cfg, ov, &mut sink)?;
            let written = sink.finish(&[Format::Csv, Format::Json])?;
            return match gate {
                GateStatus::Fail(l2_error) => Err(CliError::GateFailed {
                    l2_error,
                    threshold: GATE_L2,
                }),
                _ => Ok(written),
            };
        }
        Command::State => state(cfg, &mut sink)?,
        Command::Fig1 => fig1(cfg, &mut sink)?,
        Command::Coherence => coherence(cfg, &mut sink)?,
    }
    let available: &[Format] = match cmd {
        Command::Fig1 => &[Format::Csv, Format::Svg],
        _ => &[Format::Csv, Format::Json],
    };
    sink.finish(available)
}

#[derive(Serialize)]
struct PeakRow {
    m: i64,
    nominal: f64,
    position: f64,
    height: f64,
    width: f64,
    expected_width: f64,
}

fn psd(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let (comb, env, grid) = (cfg.comb(), cfg.envelope(), cfg.grid());
    let (sd, range) = psd_analytic_with_range(&comb, &env, &grid, &cfg.truncation())?;
    let norm = normalize(&sd)?;
    sink.put(Format::Csv, "psd.csv", || sd.to_csv())?;
    sink.put(Format::Csv, "psd_normalized.csv", || norm.to_csv())?;
    if sink.wants(Format::Json) {
        let peaks: Vec<PeakRow> = analyze_lines(&sd, &comb, &env, range, 0.25)
            .into_iter()
            .map(|f| PeakRow {
                m: f.m,
                nominal: f.nominal,
                position: f.fit.center,
                height: f.fit.height * env.power_at_offset(f.fit.center - comb.nu_c),
                width: f.fit.sigma,
                expected_width: f.expected_width,
            })
            .collect();
        let meta = json!({
            "truncation": { "m_min": range.m_min, "m_max": range.m_max, "rel_tol": cfg.trunc.rel_tol },
            "grid": grid,
            "integral": sd.integral(),
            "normalized_integral": norm.integral(),
            "peaks": peaks,
        });
        sink.put_json("meta.json", &meta)?;
    }
    Ok(())
}

enum GateStatus {
    Pass,
    Fail(f64),
    Skipped,
}

fn oracle(cfg: &RunConfig, ov: &Overrides, sink: &mut Sink) -> Result<GateStatus, CliError> {
    let n_samples = ov.samples.unwrap_or(cfg.oracle.n_samples);
    let seed = ov.seed.unwrap_or(cfg.oracle.seed);
    if n_samples == 0 {
        return Err(CliError::validation("oracle.n_samples", "must be >= 1"));
    }
    let report = mc_psd(
        &cfg.comb(),
        &cfg.envelope(),
        &cfg.grid(),
        &cfg.truncation(),
        n_samples,
        seed,
    )?;
    let l2 = report.l2_error_vs_analytic;
    let (status, label) = if n_samples < GATE_MIN_SAMPLES {
        (GateStatus::Skipped, "insufficient samples")
    } else if l2 < GATE_L2 {
        (GateStatus::Pass, "pass")
    } else {
        (GateStatus::Fail(l2), "fail")
    };
    sink.put(Format::Csv, "oracle.csv", || report.estimate.to_csv())?;
    let mut value = report.to_json_value();
    value["gate"] = json!({
        "threshold": GATE_L2,
        "min_samples": GATE_MIN_SAMPLES,
        "applied": !matches!(status, GateStatus::Skipped),
        "status": label,
    });
    sink.put_json("oracle_report.json", &value)?;
    Ok(status)
}

fn state(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let alpha_sq = cfg
        .alpha_sq
        .ok_or_else(|| CliError::validation("alpha_sq", "required by the state command"))?;
    let sd = psd_analytic(&cfg.comb(), &cfg.envelope(), &cfg.grid(), &cfg.truncation())?;
    let rho = single_photon_state(&normalize(&sd)?)?;
    let coherent = MixedCoherentState::new(rho, alpha_sq)?;
    sink.put_json("state.json", &StateDiagnostics::of(&coherent))?;
    sink.put(Format::Csv, "rho_diag.csv", || coherent.base.to_csv())?;
    Ok(())
}

/// One-sided spectrum (four times the positive half, so line heights compare
/// with a unit-peak envelope) next to the envelope itself.
fn fig1(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let (comb, env, grid) = (cfg.comb(), cfg.envelope(), cfg.grid());
    let sd = psd_one_sided(&comb, &env, &grid, &cfg.truncation())?;
    let nu: Vec<f64> = grid.iter().collect();
    let envelope: Vec<f64> = nu.iter().map(|&x| env.evaluate(x)).collect();
    sink.put(Format::Csv, "fig1.csv", || {
        qcomb::io::csv_table(&["nu", "S", "envelope"], &[&nu, &sd.values, &envelope])
    })?;
    sink.put(Format::Svg, "fig1.svg", || {
        svg::fig1(&nu, &sd.values, &envelope)
    })?;
    Ok(())
}

fn coherence(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let sd = psd_analytic(&cfg.comb(), &cfg.envelope(), &cfg.grid(), &cfg.truncation())?;
    let half = sd.non_negative_half().unwrap_or(sd);
    let half = normalize(&half)?;
    if sink.wants(Format::Csv) {
        let gamma = mutual_coherence(&half, half.grid.count);
        sink.put(Format::Csv, "coherence.csv", || gamma.to_csv())?;
    }
    let summary = json!({
        "coherence_time": coherence_time(&half),
        "tau_step": 1.0 / (half.grid.count as f64 * half.grid.step),
        "tau_count": half.grid.count,
    });
    sink.put_json("coherence.json", &summary)?;
    Ok(())
}

/// Loads `path`, or the worked-example defaults when no path is given and
/// the command has defaults.
pub fn load_config(cmd: Command, path: Option<&Path>) -> Result<RunConfig, CliError> {
    match (path, cmd) {
        (Some(p), _) => RunConfig::load(p),
        (None, Command::Fig1) => Ok(RunConfig::fig1_defaults()),
        (None, _) => Err(CliError::validation(
            "--config",
            "a config file is required",
        )),
    }
}
