//! Event-level Monte Carlo of a Bell campaign under a v-causal model.
//!
//! Each entangled pair is emitted at a Poisson time, detected at both ends
//! of the rotating baseline with independent timing jitter, and the two
//! detection events are tested against the hypothesised signal speed in the
//! preferred frame. Linked pairs follow the quantum law
//! `P(oA, oB | a, b) = ¼[1 + oA·oB·V·cos 2(a − b)]`; unlinked pairs give
//! independent fair outcomes.

pub mod chsh;
pub mod tally;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bound::{eval_bound, BoundInputs, PreferredFrame};
use crate::consts::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::kinematics::{
    baseline_direction, effective_sin_chi, max_abs_projection, required_beta_for, MovingFrame, SiteGeometry,
};
use crate::schedule::{effective_dt, MeasurementSchedule, SettingPair};

pub use chsh::{chsh_E, chsh_S, detect_drop, BellEstimate, Counts};
pub use tally::{CoincidenceTally, RNG_ALGORITHM};

/// Site and apparatus parameters for a simulated campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub site: SiteGeometry,
    /// Optical-path equalization uncertainty, meters.
    pub delta_d: f64,
    /// Truncates the schedule, seconds from campaign start.
    #[serde(default)]
    pub horizon: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        crate::budget::rho(self.delta_d, self.site.d)?;
        if let Some(h) = self.horizon {
            if !(h > 0.0) {
                return Err(Error::Config(format!("horizon {h} s must be > 0")));
            }
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        self.delta_d / self.site.d
    }

    /// Half-width of the per-detector timing jitter, Δd / (2c).
    pub fn jitter_half_width(&self) -> f64 {
        self.delta_d / (2.0 * SPEED_OF_LIGHT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    /// Pairs per second.
    pub pair_rate: f64,
    pub visibility: f64,
}

impl Default for SourceModel {
    fn default() -> Self {
        SourceModel {
            pair_rate: 1300.0,
            visibility: 0.94,
        }
    }
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate > 0.0 && self.pair_rate.is_finite()) {
            return Err(Error::domain(format!("pair rate {} must be > 0", self.pair_rate)));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::domain(format!("visibility {} outside [0, 1]", self.visibility)));
        }
        Ok(())
    }

    /// Ideal S at the canonical angles, 2√2·V.
    pub fn ideal_s(&self) -> f64 {
        2.0 * std::f64::consts::SQRT_2 * self.visibility
    }
}

/// Reduced signal speed in the preferred frame; `f64::INFINITY` allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpeed(pub f64);

impl Serialize for SignalSpeed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for SignalSpeed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = SignalSpeed;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<SignalSpeed, E> {
                match v.trim() {
                    "inf" | "infinity" | "+inf" => Ok(SignalSpeed(f64::INFINITY)),
                    other => other.parse().map(SignalSpeed).map_err(E::custom),
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<SignalSpeed, E> {
                Ok(SignalSpeed(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<SignalSpeed, E> {
                Ok(SignalSpeed(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<SignalSpeed, E> {
                Ok(SignalSpeed(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TachyonHypothesis {
    pub beta_t: SignalSpeed,
    pub frame: MovingFrame,
}

impl TachyonHypothesis {
    pub fn new(beta_t: f64, frame: MovingFrame) -> Result<Self> {
        let hyp = TachyonHypothesis {
            beta_t: SignalSpeed(beta_t),
            frame,
        };
        hyp.validate()?;
        Ok(hyp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_t.0 > 1.0) {
            return Err(Error::domain(format!("beta_t = {} must exceed 1", self.beta_t.0)));
        }
        MovingFrame::new(self.frame.beta, self.frame.direction).map(|_| ())
    }

    /// Whether a pair needing `required` is linked.
    pub fn connects(&self, required: f64) -> bool {
        self.beta_t.0 >= required
    }
}

/// Largest |b·û| at which some pair within the timing jitter can outrun a
/// signal of speed `beta_t`. Use as `tolerance_cos` to get the windows where
/// correlations can drop.
pub fn critical_tolerance_cos(rho: f64, beta: f64, beta_t: f64) -> Result<f64> {
    crate::bound::check_rho(rho)?;
    crate::bound::check_beta(beta)?;
    if !(beta_t > 1.0) {
        return Err(Error::domain("beta_t must exceed 1"));
    }
    if beta == 0.0 {
        return Ok(f64::INFINITY);
    }
    let reach = if beta_t.is_infinite() {
        0.0
    } else {
        ((1.0 - beta * beta) / ((beta_t - 1.0) * (beta_t + 1.0))).sqrt()
    };
    Ok((rho + reach) / beta)
}

struct Segment {
    bin: usize,
    setting: usize,
    start: f64,
    end: f64,
}

fn distinct_settings(schedule: &MeasurementSchedule) -> (Vec<SettingPair>, Vec<usize>) {
    let mut unique: Vec<SettingPair> = Vec::new();
    let index = schedule
        .settings
        .iter()
        .map(|s| match unique.iter().position(|u| u == s) {
            Some(i) => i,
            None => {
                unique.push(*s);
                unique.len() - 1
            }
        })
        .collect();
    (unique, index)
}

/// Runs a campaign and returns the coincidence tally.
///
/// Acquisitions run in parallel, each on its own ChaCha8 stream derived from
/// `seed` and the acquisition index, so results are bit-identical for any
/// thread count.
pub fn simulate_campaign(
    config: &ExperimentConfig,
    source: &SourceModel,
    hyp: &TachyonHypothesis,
    schedule: &MeasurementSchedule,
    seed: u64,
) -> Result<CoincidenceTally> {
    config.validate()?;
    source.validate()?;
    hyp.validate()?;
    let plan = schedule.plan(&config.site, &hyp.frame.direction, config.horizon)?;
    let (settings, setting_index) = distinct_settings(schedule);
    let segments: Vec<Segment> = plan
        .acquisitions
        .iter()
        .map(|a| Segment {
            bin: a.bin,
            setting: setting_index[a.setting],
            start: a.start,
            end: a.end,
        })
        .collect();

    let interarrival = Exp::new(source.pair_rate).map_err(|e| Error::domain(e.to_string()))?;
    let jitter = config.jitter_half_width();
    let empty = CoincidenceTally::empty(plan.bins.clone(), settings.clone(), seed);

    let tally = segments
        .par_iter()
        .enumerate()
        .fold(
            || empty.clone(),
            |mut tally, (i, seg)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let pair = settings[seg.setting];
                let law = source.visibility * (2.0 * (pair.a.si() - pair.b.si())).cos();
                let p_same = 0.5 * (1.0 + law);
                let mut t = seg.start;
                loop {
                    t += interarrival.sample(&mut rng);
                    if t >= seg.end {
                        break;
                    }
                    let b = baseline_direction(t, &config.site);
                    let dx = b.map(|c| c * config.site.d);
                    let ja: f64 = rng.random_range(-jitter..=jitter);
                    let jb: f64 = rng.random_range(-jitter..=jitter);
                    let a_plus: bool = rng.random();
                    let r: f64 = rng.random();
                    let required = required_beta_for(jb - ja, &dx, &hyp.frame).unwrap_or(f64::INFINITY);
                    let b_plus = if hyp.connects(required) {
                        if r < p_same {
                            a_plus
                        } else {
                            !a_plus
                        }
                    } else {
                        tally.disconnected += 1;
                        r < 0.5
                    };
                    tally.counts[seg.bin][seg.setting].record(a_plus, b_plus);
                    tally.pairs += 1;
                }
                tally
            },
        )
        .reduce(
            || empty.clone(),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    Ok(tally)
}

/// Outcome of drop detection over an estimate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub threshold: f64,
    pub bins: Vec<usize>,
    pub bin_bounds: Vec<(f64, f64)>,
    pub estimated_bins: usize,
}

impl DropReport {
    pub fn from_series(series: &[BellEstimate], threshold: f64) -> Result<Self> {
        let bins = detect_drop(series, threshold)?;
        let bin_bounds = bins
            .iter()
            .filter_map(|b| series.iter().find(|e| e.bin == *b))
            .map(|e| (e.bin_start, e.bin_end))
            .collect();
        Ok(DropReport {
            threshold,
            bins,
            bin_bounds,
            estimated_bins: series.len(),
        })
    }

    pub fn dropped(&self) -> bool {
        !self.bins.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedBound {
    /// Strongest constraint over the scheduled bins.
    pub bound: f64,
    /// Bin that set it.
    pub bin: usize,
    /// Closed-form value for the same ρ, δt and crossing-rate factor.
    pub closed_form: Option<f64>,
}

impl SimulatedBound {
    pub fn relative_gap(&self) -> Option<f64> {
        self.closed_form.map(|c| (self.bound - c).abs() / c)
    }
}

/// Bound established by a campaign that saw no drop.
///
/// Within each bin the guaranteed constraint is the smallest required speed
/// among the bin's extreme event pairs: detection-time difference at ±Δd/c
/// and baseline at its largest projection on û. Every bin holds
/// simultaneously, so the campaign bound is the largest of these.
pub fn bound_from_simulation(
    config: &ExperimentConfig,
    schedule: &MeasurementSchedule,
    frame: &MovingFrame,
    drop_report: &DropReport,
) -> Result<SimulatedBound> {
    if drop_report.dropped() {
        return Err(Error::DropDetected {
            bins: drop_report.bins.len(),
        });
    }
    config.validate()?;
    let geo = &config.site;
    let plan = schedule.plan(geo, &frame.direction, config.horizon)?;
    let lag = config.delta_d / SPEED_OF_LIGHT;

    let mut best: Option<(f64, usize)> = None;
    for (i, &(s, e)) in plan.bins.iter().enumerate() {
        let (t, _) = max_abs_projection(geo, &frame.direction, s, e);
        let dx = baseline_direction(t, geo).map(|c| c * geo.d);
        let per_bin = [-lag, lag]
            .iter()
            .map(|&dt| required_beta_for(dt, &dx, frame))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(b, _)| per_bin > b) {
            best = Some((per_bin, i));
        }
    }
    let (bound, bin) = best.ok_or_else(|| Error::Config("schedule has no bins".into()))?;

    let closed_form = effective_sin_chi(geo, &frame.direction)
        .map(|s| -> Result<f64> {
            let inputs = BoundInputs::new(config.rho(), effective_dt(schedule))?.with_omega(geo.omega)?;
            eval_bound(&inputs, &PreferredFrame::new(frame.beta, s.clamp(0.0, 1.0).asin())?)
        })
        .transpose()?;
    Ok(SimulatedBound { bound, bin, closed_form })
}
