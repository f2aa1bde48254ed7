//! JSON configuration for simulation runs.
//!
//! Lengths, durations and angles are unit-suffixed strings (`"215um"`,
//! `"0.492s"`, `"83.6deg"`); bare numbers are read as SI.
//!
//! ```json
//! {
//!   "preset": "ego_red",
//!   "hypothesis": { "beta_t": "inf", "frame": { "beta": 1.3e-3, "chi": "83.6deg" } },
//!   "schedule": { "kind": "split_days", "days": 4, "window_per_day": "0.492s", "guard_bins": 20 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{FrameDirection, MovingFrame, SiteGeometry};
use crate::scan::{preset, ExperimentPreset, PresetName};
use crate::schedule::{build_split_days, build_standard, MeasurementSchedule};
use crate::sim::{
    bound_from_simulation, simulate_campaign, BellEstimate, CoincidenceTally, DropReport, ExperimentConfig,
    SignalSpeed, SimulatedBound, SourceModel, TachyonHypothesis,
};
use crate::units::{Angle, Length, Seconds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub beta: f64,
    /// Polar angle of the frame velocity from the rotation axis.
    pub chi: Angle,
    #[serde(default)]
    pub azimuth: Angle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSpec {
    pub beta_t: SignalSpeed,
    pub frame: FrameSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Standard {
        per_setting: Seconds,
        #[serde(default)]
        rotation_overhead: Seconds,
        #[serde(default)]
        total_span: Option<Seconds>,
    },
    SplitDays {
        days: u32,
        window_per_day: Seconds,
        #[serde(default)]
        guard_bins: u32,
    },
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<MeasurementSchedule> {
        match *self {
            ScheduleSpec::Standard {
                per_setting,
                rotation_overhead,
                total_span,
            } => {
                let s = build_standard(per_setting.si(), rotation_overhead.si())?;
                Ok(match total_span {
                    Some(span) => s.with_total_span(span.si()),
                    None => s,
                })
            }
            ScheduleSpec::SplitDays {
                days,
                window_per_day,
                guard_bins,
            } => Ok(build_split_days(days, window_per_day.si())?.with_guard_bins(guard_bins)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSpec {
    pub alpha: Angle,
    pub d: Length,
    #[serde(default)]
    pub phase0: Angle,
}

fn default_threshold() -> f64 {
    2.0
}

fn yes() -> bool {
    true
}

/// On-disk simulation config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    #[serde(default)]
    pub preset: Option<PresetName>,
    pub hypothesis: HypothesisSpec,
    #[serde(default)]
    pub source: Option<SourceModel>,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub site: Option<SiteSpec>,
    /// Path-equalization uncertainty; defaults to ρ·d from the preset.
    #[serde(default)]
    pub delta_d: Option<Length>,
    #[serde(default)]
    pub horizon: Option<Seconds>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "yes")]
    pub request_bound: bool,
    #[serde(default = "default_threshold")]
    pub drop_threshold: f64,
}

impl SimulationFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fills defaults from the preset and validates everything.
    pub fn resolve(&self, seed: u64) -> Result<SimulationSetup> {
        let base: Option<ExperimentPreset> = match self.preset {
            Some(PresetName::Custom) | None => None,
            Some(name) => Some(preset(name.as_str())?),
        };
        let site = match (&self.site, &base) {
            (Some(s), _) => SiteGeometry::new(s.alpha.si(), s.d.si(), s.phase0.si())?,
            (None, Some(p)) => p.site,
            (None, None) => return Err(Error::Config("no preset given, so `site` is required".into())),
        };
        let delta_d = match (self.delta_d, &base) {
            (Some(l), _) => l.si(),
            (None, Some(p)) => p.rho * site.d,
            (None, None) => return Err(Error::Config("no preset given, so `delta_d` is required".into())),
        };
        let schedule = match (&self.schedule, &base) {
            (Some(s), _) => s.build()?,
            (None, Some(p)) => p.schedule.clone(),
            (None, None) => return Err(Error::Config("no preset given, so `schedule` is required".into())),
        };
        let f = &self.hypothesis.frame;
        let frame = MovingFrame::new(f.beta, FrameDirection::new(f.chi.si(), f.azimuth.si())?)?;
        let hypothesis = TachyonHypothesis::new(self.hypothesis.beta_t.0, frame)?;
        let config = ExperimentConfig {
            site,
            delta_d,
            horizon: self.horizon.map(Seconds::si),
        };
        config.validate()?;
        let source = self.source.unwrap_or_default();
        source.validate()?;
        Ok(SimulationSetup {
            config,
            source,
            hypothesis,
            schedule,
            seed,
            request_bound: self.request_bound,
            drop_threshold: self.drop_threshold,
        })
    }
}

/// A fully resolved simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSetup {
    pub config: ExperimentConfig,
    pub source: SourceModel,
    pub hypothesis: TachyonHypothesis,
    pub schedule: MeasurementSchedule,
    pub seed: u64,
    pub request_bound: bool,
    pub drop_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub tally: CoincidenceTally,
    pub series: Vec<BellEstimate>,
    pub aggregate: Option<BellEstimate>,
    pub drops: DropReport,
    /// `None` when a drop was detected.
    pub bound: Option<SimulatedBound>,
}

impl SimulationSetup {
    pub fn run(&self) -> Result<SimulationRun> {
        let tally = simulate_campaign(&self.config, &self.source, &self.hypothesis, &self.schedule, self.seed)?;
        let series = tally.estimate_series();
        let drops = DropReport::from_series(&series, self.drop_threshold)?;
        let bound = if drops.dropped() {
            None
        } else {
            Some(bound_from_simulation(&self.config, &self.schedule, &self.hypothesis.frame, &drops)?)
        };
        Ok(SimulationRun {
            aggregate: tally.aggregate_estimate().ok(),
            tally,
            series,
            drops,
            bound,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RED: &str = r#"{
        "preset": "ego_red",
        "hypothesis": { "beta_t": "inf", "frame": { "beta": 1.3e-3, "chi": "83.6deg" } },
        "schedule": { "kind": "split_days", "days": 4, "window_per_day": "0.492s", "guard_bins": 2 }
    }"#;

    #[test]
    fn resolves_preset_defaults() {
        let file = SimulationFile::from_json(RED).unwrap();
        let setup = file.resolve(1).unwrap();
        assert!((setup.config.rho() - 1.83e-7).abs() < 1e-20);
        assert_eq!(setup.source, SourceModel::default());
        assert_eq!(setup.schedule.guard_bins, 2);
        assert!(setup.hypothesis.beta_t.0.is_infinite());
        assert!(setup.request_bound);
    }

    #[test]
    fn custom_needs_site() {
        let json = r#"{ "hypothesis": { "beta_t": 1e6, "frame": { "beta": 0.001, "chi": "90deg" } } }"#;
        let err = SimulationFile::from_json(json).unwrap().resolve(0).unwrap_err();
        assert!(err.is_usage());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_units() {
        assert!(SimulationFile::from_json(&RED.replace("\"preset\"", "\"presett\"")).is_err());
        assert!(SimulationFile::from_json(&RED.replace("0.492s", "0.492parsecs")).is_err());
    }

    #[test]
    fn physics_errors_are_domain_errors() {
        let bad = RED.replace("\"inf\"", "0.5");
        let err = SimulationFile::from_json(&bad).unwrap().resolve(0).unwrap_err();
        assert!(!err.is_usage());
    }

    #[test]
    fn config_round_trips() {
        let file = SimulationFile::from_json(RED).unwrap();
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(SimulationFile::from_json(&json).unwrap(), file);
    }
}
