//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use qbcharge::protocols::{run_protocol, sweep_onset};
use qbcharge::{BatteryState, SimulationRecord};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CurveConfig, RunConfig, Scenario, SweepConfig};
use crate::error::CliError;
use crate::output::{
    derived_constants, rounded, to_rounded_json, write_curve_csv, write_distributions_csv, write_json,
    write_onset_csv, write_record_csv,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Recursively overlays `patch` onto `base`; objects merge, everything else
/// is replaced.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Reads a config file (if any), overlays the flag values and deserializes.
pub fn load_config<T>(path: Option<&Path>, patch: Value) -> Result<T, CliError>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let mut value = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            // parse into the typed form first so errors carry line and column
            let typed: T = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::to_value(typed)?
        }
        None => json!({}),
    };
    merge(&mut value, patch);
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn finish(mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush()?;
    Ok(())
}

/// Sends output to `path`, or to stdout when no path is given.
fn emit<F>(path: Option<&Path>, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match path {
        Some(p) => {
            let mut w = create(p)?;
            write(&mut w)?;
            finish(w)
        }
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<SimulationRecord, CliError> {
    let run = cfg.prepare()?;
    info!("{}: {} collisions, Ωτ = {:.6}", cfg.label(), run.schedule.len(), run.schedule.total_time());
    let rec = run_protocol(&run.model, &run.schedule, &BatteryState::ground(&run.model), &run.options)?;
    rec.check_invariants()?;
    Ok(rec)
}

fn summary(rec: &SimulationRecord) -> Value {
    let last = rec.last();
    json!({
        "steps": last.map_or(0, |r| r.step),
        "omega_tau": rec.total_time(),
        "final_energy": rec.final_energy(),
        "final_ergotropy": last.map_or(0.0, |r| r.ergotropy),
        "final_top_level_population": last.map_or(0.0, |r| r.top_level_population),
    })
}

fn distributions_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_distributions.csv"))
}

pub fn simulate(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let rec = execute(cfg)?;
    let meta = json!({
        "config": to_rounded_json(cfg)?,
        "derived": derived_constants(),
        "summary": rounded(summary(&rec)),
    });
    match format {
        Format::Json => {
            let mut doc = meta;
            doc["record"] = to_rounded_json(&rec)?;
            emit(out, |w| write_json(w, &doc))
        }
        Format::Csv => {
            emit(out, |w| write_record_csv(w, &rec))?;
            let Some(out) = out else {
                if cfg.distributions {
                    log::warn!("distributions are only written next to an --out file");
                }
                return Ok(());
            };
            let sidecar = out.with_extension("json");
            if sidecar == out {
                return Err(CliError::Config(format!("{} would be overwritten by its JSON sidecar; use a .csv name", out.display())));
            }
            let mut w = create(&sidecar)?;
            write_json(&mut w, &meta)?;
            finish(w)?;
            if cfg.distributions {
                let mut w = create(&distributions_path(out))?;
                write_distributions_csv(&mut w, &rec)?;
                finish(w)?;
            }
            Ok(())
        }
    }
}

pub fn bound(curve: &CurveConfig, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let points = curve.evaluate()?;
    match format {
        Format::Csv => emit(out, |w| write_curve_csv(w, &points)),
        Format::Json => {
            let doc = json!({
                "curve": to_rounded_json(curve)?,
                "derived": derived_constants(),
                "points": to_rounded_json(&points)?,
            });
            emit(out, |w| write_json(w, &doc))
        }
    }
}

fn sweep_rows(sweep: &SweepConfig) -> Result<Vec<qbcharge::AdvantageOnset>, CliError> {
    let model = sweep.validate()?;
    let thetas: Vec<f64> = sweep.thetas.iter().map(|a| a.0).collect();
    info!("onset sweep over {} points", thetas.len() * sweep.gammas.len());
    Ok(sweep_onset(&model, &thetas, &sweep.gammas, sweep.horizon)?)
}

pub fn sweep(sweep: &SweepConfig, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let rows = sweep_rows(sweep)?;
    match format {
        Format::Csv => emit(out, |w| write_onset_csv(w, &rows)),
        Format::Json => {
            let doc = json!({
                "sweep": to_rounded_json(sweep)?,
                "derived": derived_constants(),
                "rows": to_rounded_json(&rows)?,
            });
            emit(out, |w| write_json(w, &doc))
        }
    }
}

/// Runs every part of a scenario and writes one CSV per run or curve, plus
/// `onset.csv` for sweeps and a `manifest.json` describing the lot.
pub fn reproduce(scenario: &Scenario, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    scenario.validate()?;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let records = scenario.runs.par_iter().map(execute).collect::<Result<Vec<_>, _>>()?;
    let curves = scenario.curves.iter().map(CurveConfig::evaluate).collect::<Result<Vec<_>, _>>()?;
    let onset = scenario.sweep.as_ref().map(sweep_rows).transpose()?;

    let mut files = Vec::new();
    let mut runs = Vec::new();
    for (cfg, rec) in scenario.runs.iter().zip(&records) {
        let path = dir.join(format!("{}.csv", cfg.label()));
        let mut w = create(&path)?;
        write_record_csv(&mut w, rec)?;
        finish(w)?;
        files.push(path);
        if cfg.distributions {
            let path = distributions_path(&files[files.len() - 1]);
            let mut w = create(&path)?;
            write_distributions_csv(&mut w, rec)?;
            finish(w)?;
            files.push(path);
        }
        runs.push(json!({ "label": cfg.label(), "summary": rounded(summary(rec)) }));
    }
    for (cfg, points) in scenario.curves.iter().zip(&curves) {
        let path = dir.join(format!("{}.csv", cfg.label()));
        let mut w = create(&path)?;
        write_curve_csv(&mut w, points)?;
        finish(w)?;
        files.push(path);
    }
    if let Some(rows) = &onset {
        let path = dir.join("onset.csv");
        let mut w = create(&path)?;
        write_onset_csv(&mut w, rows)?;
        finish(w)?;
        files.push(path);
    }
    let names: Vec<String> =
        files.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()).collect();
    let manifest = json!({
        "scenario": to_rounded_json(scenario)?,
        "derived": derived_constants(),
        "runs": runs,
        "files": names,
    });
    let path = dir.join("manifest.json");
    let mut w = create(&path)?;
    write_json(&mut w, &manifest)?;
    finish(w)?;
    files.push(path);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_overlays_nested_objects() {
        let mut base = json!({"battery": {"kind": "spin", "spin_j": 2.0}, "gamma": 0.1});
        merge(&mut base, json!({"battery": {"spin_j": 3.0}, "record_every": 4}));
        assert_eq!(base, json!({"battery": {"kind": "spin", "spin_j": 3.0}, "gamma": 0.1, "record_every": 4}));
    }

    #[test]
    fn flags_alone_make_a_config() {
        let patch = json!({
            "battery": {"kind": "uniform-ladder", "dim": 5},
            "schedule": {"policy": "fixed", "theta": "pi/2", "steps": 3},
        });
        let cfg: RunConfig = load_config(None, patch).unwrap();
        assert_eq!(cfg.prepare().unwrap().schedule.len(), 3);
        let err = load_config::<RunConfig>(None, json!({"battery": {"kind": "oscillator"}})).unwrap_err();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("schedule")), "{err}");
    }
}
