//! CSV and JSON writers. Floats are written with 12 significant digits so
//! that repeated runs produce byte-identical files.

use std::io::Write;

use qbcharge::bounds::r0;
use qbcharge::{AdvantageOnset, SimulationRecord};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub const RECORD_COLUMNS: [&str; 8] = [
    "step",
    "omega_tau",
    "mean_energy",
    "ergotropy",
    "transient_power",
    "cumulative_power",
    "purity",
    "top_level_population",
];

pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn round_sig(x: f64) -> f64 {
    fmt_num(x).parse().expect("formatted float parses")
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

pub fn to_rounded_json<T: Serialize>(value: &T) -> Result<Value, CliError> {
    Ok(rounded(serde_json::to_value(value)?))
}

pub fn write_json<W: Write>(mut w: W, value: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Reference constants echoed in every JSON document.
pub fn derived_constants() -> Value {
    let c = r0();
    rounded(json!({ "r0": c.value, "r0_maximizer": c.maximizer }))
}

pub fn write_record_csv<W: Write>(w: W, rec: &SimulationRecord) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RECORD_COLUMNS)?;
    for r in &rec.rows {
        out.write_record([
            r.step.to_string(),
            fmt_num(r.omega_tau),
            fmt_num(r.mean_energy),
            fmt_num(r.ergotropy),
            fmt_num(r.transient_power),
            fmt_num(r.cumulative_power),
            fmt_num(r.purity),
            fmt_num(r.top_level_population),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Level populations in long format, one line per recorded step and level.
pub fn write_distributions_csv<W: Write>(w: W, rec: &SimulationRecord) -> Result<(), CliError> {
    let dists = rec.distributions.as_ref().ok_or_else(|| CliError::Config("run did not keep distributions".into()))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "omega_tau", "level", "population"])?;
    for (r, p) in rec.rows.iter().zip(dists) {
        for (n, x) in p.iter().enumerate() {
            out.write_record([r.step.to_string(), fmt_num(r.omega_tau), n.to_string(), fmt_num(*x)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_curve_csv<W: Write>(w: W, points: &[(f64, f64)]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["omega_tau", "energy"])?;
    for (t, e) in points {
        out.write_record([fmt_num(*t), fmt_num(*e)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_onset_csv<W: Write>(w: W, rows: &[AdvantageOnset]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["theta", "theta_over_pi", "gamma", "tau_ad", "steps"])?;
    for r in rows {
        out.write_record([
            fmt_num(r.theta),
            fmt_num(r.theta / std::f64::consts::PI),
            fmt_num(r.gamma),
            r.tau_ad.map_or_else(|| "none".to_string(), fmt_num),
            r.steps.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qbcharge::RecordRow;

    #[test]
    fn numbers_have_twelve_digits() {
        assert_eq!(fmt_num(0.1), "1.00000000000e-1");
        assert_eq!(fmt_num(-2.0), "-2.00000000000e0");
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(rounded(json!({"a": [1.0 / 3.0, 2], "b": "x"})), json!({"a": [0.333333333333, 2], "b": "x"}));
    }

    #[test]
    fn record_csv_layout() {
        let row = RecordRow {
            step: 3,
            omega_tau: 0.5,
            mean_energy: 1.0,
            ergotropy: 0.5,
            transient_power: 0.25,
            cumulative_power: 2.0,
            purity: 1.0,
            top_level_population: 0.0,
        };
        let rec = SimulationRecord { rows: vec![row], distributions: Some(vec![vec![0.75, 0.25]]) };
        let mut buf = Vec::new();
        write_record_csv(&mut buf, &rec).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RECORD_COLUMNS.join(","));
        assert!(lines.next().unwrap().starts_with("3,5.00000000000e-1,1.00000000000e0,"));
        let mut buf = Vec::new();
        write_distributions_csv(&mut buf, &rec).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }

    #[test]
    fn missing_onset_is_written_as_none() {
        let rows = [AdvantageOnset { theta: 0.1, gamma: 0.0, tau_ad: None, steps: 7 }];
        let mut buf = Vec::new();
        write_onset_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().nth(1).unwrap().ends_with(",none,7"));
    }
}
