//! Run, bound, sweep and scenario configuration. The same structures back
//! JSON config files, the built-in presets and the command-line flags.

use std::f64::consts::PI;
use std::fmt;

use clap::ValueEnum;
use qbcharge::bounds::{
    lossy_energy_bound, oscillator_energy_bound, spin_energy_bound, LossyBoundCurve,
};
use qbcharge::protocols::{
    driving_limit_oscillator, driving_limit_spin, fixed_schedule, fixed_schedule_until, full_swap_schedule,
    greedy_schedule, DEFAULT_ONSET_HORIZON,
};
use qbcharge::{BatteryModel, GreedyObjective, QubitState, RunOptions, Schedule};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

/// Greedy schedules stop after this many collisions unless configured otherwise.
pub const DEFAULT_MAX_STEPS: usize = 100_000;
pub const DEFAULT_CURVE_POINTS: usize = 201;

/// Parses `0.3`, `pi`, `0.01pi`, `0.01*pi`, `pi/4` or `0.5π` into radians.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim();
    let bad = || format!("cannot read angle {text:?}; use radians or a multiple of pi such as 0.01pi");
    let split = s.find("pi").map(|i| (i, 2)).or_else(|| s.find('π').map(|i| (i, 'π'.len_utf8())));
    let value = match split {
        None => s.parse::<f64>().map_err(|_| bad())?,
        Some((i, len)) => {
            let coef = s[..i].trim().trim_end_matches('*').trim();
            let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
            let tail = s[i + len..].trim();
            let div = match tail.strip_prefix('/') {
                Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
                None if tail.is_empty() => 1.0,
                None => return Err(bad()),
            };
            coef * PI / div
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// An angle in radians that may be written as a multiple of π in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Angle(x)),
            Raw::Text(s) => parse_angle(&s).map(Angle).map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_angle(s).map(Angle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Battery {
    Oscillator,
    Spin,
    UniformLadder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyArg {
    Fixed,
    Fullswap,
    GreedyCum,
    GreedyTrans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub kind: Battery,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_j: Option<f64>,
}

impl BatteryConfig {
    pub fn model(&self) -> Result<BatteryModel, CliError> {
        let need_dim = |what: &str| self.dim.ok_or_else(|| CliError::Config(format!("battery.dim is required for {what}")));
        let model = match (self.kind, self.spin_j) {
            (Battery::Oscillator, Some(_)) | (Battery::UniformLadder, Some(_)) => {
                return Err(CliError::Config("battery.spin_j only applies to spin batteries".into()))
            }
            (Battery::Oscillator, None) => BatteryModel::oscillator(need_dim("an oscillator")?)?,
            (Battery::UniformLadder, None) => BatteryModel::uniform_ladder(need_dim("a uniform ladder")?)?,
            (Battery::Spin, Some(j)) => {
                let m = BatteryModel::spin(j)?;
                if self.dim.is_some_and(|d| d != m.dim()) {
                    return Err(CliError::Config(format!("battery.dim disagrees with spin_j = {j} (2j+1 = {})", m.dim())));
                }
                m
            }
            (Battery::Spin, None) => BatteryModel::spin_with_dim(need_dim("a spin (or give spin_j)")?)?,
        };
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub q: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "zero_angle")]
    pub alpha: Angle,
}

fn zero_angle() -> Angle {
    Angle(0.0)
}

impl QubitConfig {
    pub fn state(&self) -> Result<QubitState, CliError> {
        Ok(QubitState::new(self.q, self.c, self.alpha.0)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub policy: PolicyArg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Charging-time budget for fixed and greedy schedules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_tau_max: Option<f64>,
    #[serde(default = "yes")]
    pub damp_after_last: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub battery: BatteryConfig,
    /// Defaults to `|+⟩` for fixed schedules and to excited qubits otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit: Option<QubitConfig>,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub distributions: bool,
}

/// Everything `run_protocol` needs.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub model: BatteryModel,
    pub schedule: Schedule,
    pub options: RunOptions,
}

impl RunConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| "run".into())
    }

    pub fn prepare(&self) -> Result<PreparedRun, CliError> {
        let model = self.battery.model()?;
        let s = &self.schedule;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(CliError::Config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if self.record_every == 0 {
            return Err(CliError::Config("record_every must be at least 1".into()));
        }
        let qubit = self.qubit.map(|q| q.state()).transpose()?;
        let budget = |what: &str| {
            s.omega_tau_max
                .filter(|t| t.is_finite() && *t > 0.0)
                .ok_or_else(|| CliError::Config(format!("schedule.omega_tau_max (a positive charging time) is required for {what}")))
        };
        let mut schedule = match s.policy {
            PolicyArg::Fixed => {
                let theta = s.theta.ok_or_else(|| CliError::Config("schedule.theta is required for the fixed policy".into()))?.0;
                let qs = qubit.unwrap_or_else(QubitState::plus);
                match (s.steps, s.omega_tau_max) {
                    (Some(k), None) => fixed_schedule(qs, theta, k, self.gamma),
                    (None, Some(_)) => fixed_schedule_until(qs, theta, budget("the fixed policy")?, self.gamma),
                    _ => {
                        return Err(CliError::Config(
                            "the fixed policy needs exactly one of schedule.steps and schedule.omega_tau_max".into(),
                        ))
                    }
                }
            }
            PolicyArg::Fullswap => {
                if qubit.is_some_and(|q| q != QubitState::excited()) {
                    return Err(CliError::Config("the full-swap policy uses excited qubits (q = 0)".into()));
                }
                if s.theta.is_some() {
                    return Err(CliError::Config("the full-swap policy chooses its own angles; drop schedule.theta".into()));
                }
                let k = s.steps.unwrap_or(model.dim() - 1);
                full_swap_schedule(&model, k)?.with_gamma(self.gamma)
            }
            PolicyArg::GreedyCum | PolicyArg::GreedyTrans => {
                let qs = qubit.unwrap_or_else(QubitState::excited);
                if !qs.is_incoherent() {
                    return Err(CliError::Config("greedy policies need incoherent qubits (c = 0)".into()));
                }
                if s.theta.is_some() {
                    return Err(CliError::Config("greedy policies choose their own angles; drop schedule.theta".into()));
                }
                let objective =
                    if s.policy == PolicyArg::GreedyCum { GreedyObjective::Cumulative } else { GreedyObjective::Transient };
                let cap = s.steps.or(s.max_steps).unwrap_or(DEFAULT_MAX_STEPS);
                greedy_schedule(&model, qs.q(), objective, budget("greedy policies")?, self.gamma, cap)?
            }
        };
        schedule.damp_after_last = s.damp_after_last;
        schedule.validate(&model)?;
        let options = RunOptions { record_every: self.record_every, keep_distributions: self.distributions };
        Ok(PreparedRun { model, schedule, options })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// Incoherent bound for the oscillator.
    Oscillator,
    /// Incoherent bound for a spin-j battery.
    Spin,
    /// Incoherent oscillator bound with photon loss between collisions.
    Lossy,
    /// Coherent driving limit of the oscillator.
    DrivingOscillator,
    /// Coherent driving limit of a spin-j battery.
    DrivingSpin,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub kind: CurveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub omega_tau_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    DEFAULT_CURVE_POINTS
}

impl CurveConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.to_string())
    }

    /// `(Ωτ, Ē)` on a uniform grid from 0 to `omega_tau_max`; energies in
    /// units of `E` above the ground state.
    pub fn evaluate(&self) -> Result<Vec<(f64, f64)>, CliError> {
        if !(self.omega_tau_max.is_finite() && self.omega_tau_max > 0.0) {
            return Err(CliError::Config(format!("omega_tau_max must be positive, got {}", self.omega_tau_max)));
        }
        if self.points < 2 {
            return Err(CliError::Config("a curve needs at least 2 points".into()));
        }
        let spin_j = || {
            let j = self.spin_j.ok_or_else(|| CliError::Config(format!("spin_j is required for the {} curve", self.kind)))?;
            BatteryModel::spin(j)?;
            Ok::<f64, CliError>(j)
        };
        let gamma = self.gamma.unwrap_or(0.0);
        if self.gamma.is_some() && self.kind != CurveKind::Lossy {
            return Err(CliError::Config(format!("gamma only applies to the lossy curve, not {}", self.kind)));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(CliError::Config(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        let f: Box<dyn Fn(f64) -> f64> = match self.kind {
            CurveKind::Oscillator => Box::new(oscillator_energy_bound),
            CurveKind::Spin => {
                let j = spin_j()?;
                Box::new(move |t| spin_energy_bound(t, j))
            }
            CurveKind::Lossy => {
                let curve = LossyBoundCurve::new(gamma, self.omega_tau_max);
                debug_assert_eq!(curve.at(self.omega_tau_max), lossy_energy_bound(self.omega_tau_max, gamma));
                Box::new(move |t| curve.at(t))
            }
            CurveKind::DrivingOscillator => Box::new(|t| driving_limit_oscillator(t, 0).mean_energy),
            CurveKind::DrivingSpin => {
                let j = spin_j()?;
                Box::new(move |t| driving_limit_spin(t, j))
            }
        };
        let n = self.points - 1;
        Ok((0..=n)
            .map(|i| {
                let t = self.omega_tau_max * i as f64 / n as f64;
                (t, f(t))
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub battery: BatteryConfig,
    pub thetas: Vec<Angle>,
    pub gammas: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_horizon() -> f64 {
    DEFAULT_ONSET_HORIZON
}

impl SweepConfig {
    pub fn validate(&self) -> Result<BatteryModel, CliError> {
        if self.thetas.is_empty() || self.gammas.is_empty() {
            return Err(CliError::Config("an onset sweep needs at least one theta and one gamma".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(CliError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        self.battery.model()
    }
}

/// A named reproduction recipe: protocol runs, reference curves and an
/// optional onset sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub runs: Vec<RunConfig>,
    #[serde(default)]
    pub curves: Vec<CurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), CliError> {
        let mut labels: Vec<String> = self.runs.iter().map(RunConfig::label).chain(self.curves.iter().map(CurveConfig::label)).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Config(format!("label {:?} is used twice in scenario {}", w[0], self.name)));
        }
        for l in &labels {
            if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') {
                return Err(CliError::Config(format!("label {l:?} must be a plain file name")));
            }
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert!((parse_angle("0.01pi").unwrap() - 0.01 * PI).abs() < 1e-15);
        assert!((parse_angle("0.01*pi").unwrap() - 0.01 * PI).abs() < 1e-15);
        assert!((parse_angle("pi/4").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_angle(" 0.5π ").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("x").is_err());
        assert!(parse_angle("1pi/0").is_err());
    }

    fn fixed(theta: &str) -> RunConfig {
        serde_json::from_str(&format!(
            r#"{{"battery": {{"kind": "oscillator", "dim": 20}}, "schedule": {{"policy": "fixed", "theta": "{theta}", "steps": 5}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn fixed_run_defaults_to_plus_qubits() {
        let run = fixed("0.1pi").prepare().unwrap();
        assert_eq!(run.schedule.len(), 5);
        assert_eq!(run.schedule.steps[0].qubit, QubitState::plus());
        assert!((run.schedule.steps[0].theta - 0.1 * PI).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(
            r#"{"battery": {"kind": "oscillator", "dim": 20}, "schedule": {"policy": "fixed", "steps": 1}, "gama": 0.1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown field `gama`"), "{err}");
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn inconsistent_configs_are_rejected() {
        let mut c = fixed("0.1");
        c.gamma = 1.0;
        assert!(matches!(c.prepare(), Err(CliError::Config(_))));
        let mut c = fixed("0");
        assert!(matches!(c.prepare(), Err(CliError::Config(_))));
        c = fixed("0.1");
        c.schedule.policy = PolicyArg::GreedyCum;
        assert!(c.prepare().is_err());
        c.schedule.theta = None;
        c.schedule.omega_tau_max = Some(2.0);
        c.qubit = Some(QubitConfig { q: 0.5, c: 1.0, alpha: Angle(0.0) });
        assert!(c.prepare().is_err());
        c.qubit = None;
        assert!(c.prepare().is_ok());
        let spin = BatteryConfig { kind: Battery::Spin, dim: Some(7), spin_j: Some(2.0) };
        assert!(spin.model().is_err());
        let spin = BatteryConfig { kind: Battery::Spin, dim: Some(5), spin_j: Some(2.0) };
        assert_eq!(spin.model().unwrap().dim(), 5);
    }

    #[test]
    fn curves() {
        let c = CurveConfig { label: None, kind: CurveKind::Lossy, spin_j: None, gamma: Some(0.0), omega_tau_max: 4.0, points: 5 };
        let pts = c.evaluate().unwrap();
        assert_eq!(pts.len(), 5);
        for (t, e) in pts {
            assert!((e - oscillator_energy_bound(t)).abs() < 1e-9);
        }
        let c = CurveConfig { kind: CurveKind::DrivingSpin, spin_j: Some(4.5), gamma: None, omega_tau_max: PI, ..c };
        assert!((c.evaluate().unwrap().last().unwrap().1 - 9.0).abs() < 1e-12);
        let c = CurveConfig { kind: CurveKind::Spin, spin_j: None, ..c };
        assert!(c.evaluate().is_err());
    }
}
