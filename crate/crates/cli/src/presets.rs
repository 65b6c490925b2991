//! Figure-reproduction recipes. They ship as JSON files next to the crate
//! and are embedded at build time.

use clap::ValueEnum;

use crate::config::Scenario;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Energy distributions, coherent against greedy charging.
    Fig2,
    /// Oscillator charging curves and bounds.
    Fig3,
    /// Advantage onset over swap angle and loss.
    Fig4,
    /// Spin-99/2 charging curves and bounds.
    Fig5,
    /// Lossy coherent charging against the lossy bound.
    Fig6,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Figure::Fig2 => include_str!("../presets/fig2.json"),
            Figure::Fig3 => include_str!("../presets/fig3.json"),
            Figure::Fig4 => include_str!("../presets/fig4.json"),
            Figure::Fig5 => include_str!("../presets/fig5.json"),
            Figure::Fig6 => include_str!("../presets/fig6.json"),
        }
    }

    pub fn scenario(self) -> Result<Scenario, CliError> {
        parse_scenario(self.source(), self.name())
    }
}

/// Parses and validates a scenario; `origin` names the source in messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, CliError> {
    let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PolicyArg;

    #[test]
    fn presets_parse_and_validate() {
        for fig in Figure::value_variants() {
            let s = fig.scenario().unwrap();
            assert_eq!(s.name, fig.name());
            assert!(!s.description.is_empty());
            assert!(!s.runs.is_empty() || s.sweep.is_some());
            for run in &s.runs {
                if matches!(run.schedule.policy, PolicyArg::Fixed | PolicyArg::Fullswap) {
                    run.prepare().unwrap();
                } else {
                    run.battery.model().unwrap();
                }
            }
            for c in &s.curves {
                c.evaluate().unwrap();
            }
        }
    }

    #[test]
    fn oscillator_presets_use_250_levels() {
        for fig in [Figure::Fig2, Figure::Fig3, Figure::Fig6] {
            for run in fig.scenario().unwrap().runs {
                assert_eq!(run.battery.model().unwrap().dim(), 250);
            }
        }
        let spin = Figure::Fig5.scenario().unwrap();
        assert!(spin.runs.iter().all(|r| r.battery.model().unwrap().dim() == 100));
    }

    #[test]
    fn scenario_errors_name_their_origin() {
        let err = parse_scenario(r#"{"name": "x", "runz": []}"#, "custom.json").unwrap_err();
        assert!(err.to_string().contains("custom.json") && err.to_string().contains("runz"), "{err}");
    }
}
