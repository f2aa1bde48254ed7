//! Measurement timetables.
//!
//! Two kinds are supported. The standard cycle steps through 8 polarizer
//! settings (the four CHSH pairs and their orthogonal complements), so one
//! Bell-parameter measurement takes the whole cycle. The split-days plan
//! keeps one setting pair per day and only accepts coincidences in a short
//! window centred on the daily perpendicularity instant; data from
//! different days are combined at equal sidereal phase, so one Bell
//! measurement only takes the window length.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bound::{regime_threshold_dt, Regime};
use crate::consts::{sidereal_period, EARTH_OMEGA};
use crate::error::{Error, Result};
use crate::kinematics::{is_accessible, next_crossing, perpendicularity_windows, FrameDirection, SiteGeometry};
use crate::units::{Angle, Seconds};

pub const STANDARD_SETTINGS: usize = 8;
pub const MIN_SPLIT_DAYS: u32 = 4;
/// Shortest complete campaign, seconds.
pub const MIN_CAMPAIGN_SPAN: f64 = 12.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Standard,
    SplitDays,
}

/// Polarizer angles for the CHSH combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: Angle,
    pub a_prime: Angle,
    pub b: Angle,
    pub b_prime: Angle,
}

impl Default for ChshAngles {
    fn default() -> Self {
        ChshAngles {
            a: Angle(0.0),
            a_prime: Angle::from_degrees(45.0),
            b: Angle::from_degrees(22.5),
            b_prime: Angle::from_degrees(67.5),
        }
    }
}

impl ChshAngles {
    /// The four pairs in the order (a,b), (a,b′), (a′,b), (a′,b′).
    pub fn pairs(&self) -> [SettingPair; 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
        .iter()
        .enumerate()
        .map(|(slot, &(a, b))| SettingPair { a, b, slot })
        .collect::<Vec<_>>()
        .try_into()
        .expect("four pairs")
    }
}

/// One pair of polarizer orientations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingPair {
    pub a: Angle,
    pub b: Angle,
    /// Which CHSH correlator (0..4) this pair contributes to.
    pub slot: usize,
}

impl SettingPair {
    fn complement(&self) -> Self {
        SettingPair {
            a: Angle(self.a.si() + FRAC_PI_2),
            b: Angle(self.b.si() + FRAC_PI_2),
            slot: self.slot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSchedule {
    pub kind: ScheduleKind,
    pub settings: Vec<SettingPair>,
    pub per_setting_acquisition: Seconds,
    #[serde(default)]
    pub rotation_overhead: Seconds,
    #[serde(default)]
    pub days: u32,
    #[serde(default)]
    pub window_per_day: Seconds,
    /// Extra bins of width `window_per_day` recorded on each side of the
    /// central split-days window.
    #[serde(default)]
    pub guard_bins: u32,
    pub total_span: Seconds,
}

/// Standard 8-setting cycle, spanning [`MIN_CAMPAIGN_SPAN`] by default.
pub fn build_standard(per_setting: f64, rotation_overhead: f64) -> Result<MeasurementSchedule> {
    build_standard_with(per_setting, rotation_overhead, ChshAngles::default())
}

pub fn build_standard_with(per_setting: f64, rotation_overhead: f64, angles: ChshAngles) -> Result<MeasurementSchedule> {
    if !(per_setting >= 0.0 && rotation_overhead >= 0.0 && per_setting.is_finite() && rotation_overhead.is_finite()) {
        return Err(Error::Schedule(format!(
            "per-setting time ({per_setting} s) and rotation overhead ({rotation_overhead} s) must be ≥ 0"
        )));
    }
    let pairs = angles.pairs();
    let settings = pairs.iter().copied().chain(pairs.iter().map(SettingPair::complement)).collect();
    Ok(MeasurementSchedule {
        kind: ScheduleKind::Standard,
        settings,
        per_setting_acquisition: Seconds(per_setting),
        rotation_overhead: Seconds(rotation_overhead),
        days: 0,
        window_per_day: Seconds(0.0),
        guard_bins: 0,
        total_span: Seconds(MIN_CAMPAIGN_SPAN),
    })
}

/// Split-days plan: one setting pair per day, cycling through the CHSH pairs.
pub fn build_split_days(days: u32, window_per_day: f64) -> Result<MeasurementSchedule> {
    build_split_days_with(days, window_per_day, ChshAngles::default())
}

pub fn build_split_days_with(days: u32, window_per_day: f64, angles: ChshAngles) -> Result<MeasurementSchedule> {
    if days < MIN_SPLIT_DAYS {
        return Err(Error::Schedule(format!(
            "split-days procedure needs measurements on at least {MIN_SPLIT_DAYS} days (got {days})"
        )));
    }
    if !(window_per_day > 0.0 && window_per_day.is_finite()) {
        return Err(Error::Schedule(format!(
            "window per day must be > 0 (got {window_per_day} s)"
        )));
    }
    let pairs = angles.pairs();
    let mut schedule = MeasurementSchedule {
        kind: ScheduleKind::SplitDays,
        settings: (0..days as usize).map(|day| pairs[day % 4]).collect(),
        per_setting_acquisition: Seconds(window_per_day),
        rotation_overhead: Seconds(0.0),
        days,
        window_per_day: Seconds(window_per_day),
        guard_bins: 0,
        total_span: Seconds(0.0),
    };
    schedule.total_span = Seconds(schedule.split_span());
    Ok(schedule)
}

/// δt for the bound: full cycle for standard, one window for split-days.
pub fn effective_dt(schedule: &MeasurementSchedule) -> f64 {
    match schedule.kind {
        ScheduleKind::Standard => {
            STANDARD_SETTINGS as f64 * (schedule.per_setting_acquisition.si() + schedule.rotation_overhead.si())
        }
        ScheduleKind::SplitDays => schedule.window_per_day.si(),
    }
}

/// One contiguous acquisition with a fixed setting pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    /// Index into `MeasurementSchedule::settings`.
    pub setting: usize,
    /// Index into `AcquisitionPlan::bins`.
    pub bin: usize,
    pub start: f64,
    pub end: f64,
}

/// Concrete acquisition timeline. For split-days plans, bins are folded
/// onto the first day: bin boundaries are reported in day-0 time.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionPlan {
    pub bins: Vec<(f64, f64)>,
    pub acquisitions: Vec<Acquisition>,
}

impl MeasurementSchedule {
    pub fn with_total_span(mut self, span: f64) -> Self {
        self.total_span = Seconds(span);
        self
    }

    pub fn with_guard_bins(mut self, guard_bins: u32) -> Self {
        self.guard_bins = guard_bins;
        if self.kind == ScheduleKind::SplitDays {
            self.total_span = Seconds(self.split_span());
        }
        self
    }

    fn split_span(&self) -> f64 {
        (self.days.max(1) - 1) as f64 * sidereal_period(EARTH_OMEGA)
            + self.window_per_day.si() * (2 * self.guard_bins + 1) as f64
    }

    /// Number of complete CHSH cycles covered (split-days redundancy).
    pub fn redundancy(&self) -> f64 {
        match self.kind {
            ScheduleKind::Standard => 1.0,
            ScheduleKind::SplitDays => self.days as f64 / 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ScheduleKind::Standard => {
                if self.settings.len() != STANDARD_SETTINGS {
                    return Err(Error::Schedule(format!(
                        "standard cycle needs exactly {STANDARD_SETTINGS} settings (got {})",
                        self.settings.len()
                    )));
                }
                if effective_dt(self) <= 0.0 {
                    return Err(Error::Schedule("standard cycle has zero duration".into()));
                }
            }
            ScheduleKind::SplitDays => {
                if self.days < MIN_SPLIT_DAYS {
                    return Err(Error::Schedule(format!(
                        "split-days procedure needs measurements on at least {MIN_SPLIT_DAYS} days (got {})",
                        self.days
                    )));
                }
                if self.settings.len() != self.days as usize {
                    return Err(Error::Schedule("split-days plan needs one setting pair per day".into()));
                }
                if !(self.window_per_day.si() > 0.0) {
                    return Err(Error::Schedule("window per day must be > 0".into()));
                }
            }
        }
        if self.settings.iter().any(|s| s.slot > 3) {
            return Err(Error::Schedule("setting slot must be in 0..4".into()));
        }
        if !(self.total_span.si() > 0.0 && self.total_span.si().is_finite()) {
            return Err(Error::Schedule("total span must be > 0".into()));
        }
        Ok(())
    }

    /// Lays out acquisitions on the time axis, truncated at `horizon`.
    pub fn plan(&self, geo: &SiteGeometry, dir: &FrameDirection, horizon: Option<f64>) -> Result<AcquisitionPlan> {
        self.validate()?;
        let horizon = horizon.unwrap_or(f64::INFINITY);
        // Split-days plans are anchored on the first crossing, so only the
        // caller's horizon truncates them.
        let limit = match self.kind {
            ScheduleKind::Standard => horizon.min(self.total_span.si()),
            ScheduleKind::SplitDays => horizon,
        };
        let mut bins = Vec::new();
        let mut acquisitions = Vec::new();
        match self.kind {
            ScheduleKind::Standard => {
                let step = self.per_setting_acquisition.si() + self.rotation_overhead.si();
                let cycle = effective_dt(self);
                let mut c = 0usize;
                while (c as f64) * cycle < limit {
                    let t0 = c as f64 * cycle;
                    bins.push((t0, t0 + cycle));
                    for k in 0..STANDARD_SETTINGS {
                        let start = t0 + k as f64 * step;
                        let end = (start + self.per_setting_acquisition.si()).min(limit);
                        if end > start {
                            acquisitions.push(Acquisition { setting: k, bin: c, start, end });
                        }
                    }
                    c += 1;
                }
            }
            ScheduleKind::SplitDays => {
                let w = self.window_per_day.si();
                let g = self.guard_bins as f64;
                let first = next_crossing(geo, dir, w * (g + 0.5)).ok_or_else(|| {
                    Error::Schedule("frame direction is never perpendicular to the baseline".into())
                })?;
                let nbins = 2 * self.guard_bins as usize + 1;
                let day = geo.sidereal_period();
                for k in 0..nbins {
                    let s = first + (k as f64 - g - 0.5) * w;
                    bins.push((s, s + w));
                }
                for (j, _) in self.settings.iter().enumerate() {
                    let offset = j as f64 * day;
                    for (k, &(s, e)) in bins.iter().enumerate() {
                        let (start, end) = (s + offset, (e + offset).min(limit));
                        if end > start {
                            acquisitions.push(Acquisition { setting: j, bin: k, start, end });
                        }
                    }
                }
            }
        }
        if acquisitions.is_empty() {
            return Err(Error::Config(
                "no scheduled acquisition falls inside the simulation horizon".into(),
            ));
        }
        Ok(AcquisitionPlan { bins, acquisitions })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: ScheduleKind,
    pub effective_dt: f64,
    pub threshold_dt: f64,
    pub regime: Regime,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "schedule: {:?}", self.kind)?;
        writeln!(f, "effective dt: {:.9e} s", self.effective_dt)?;
        writeln!(f, "regime threshold 2rho/omega: {:.9e} s", self.threshold_dt)?;
        writeln!(f, "verdict: {}", self.regime.label())?;
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Checks a campaign plan against the completeness rules and the site
/// geometry. Failures are reported, not raised.
pub fn validate_campaign(
    schedule: &MeasurementSchedule,
    geo: &SiteGeometry,
    dir: &FrameDirection,
    rho: f64,
) -> Result<ValidationReport> {
    let threshold_dt = regime_threshold_dt(rho, geo.omega)?;
    let dt = effective_dt(schedule);
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check { name: name.into(), passed, detail })
    };

    match schedule.validate() {
        Ok(()) => push("structure", true, format!("{} settings", schedule.settings.len())),
        Err(e) => push("structure", false, e.to_string()),
    }
    let span = schedule.total_span.si();
    push(
        "span_12h",
        span >= MIN_CAMPAIGN_SPAN,
        format!("total span {:.1} h (minimum 12 h)", span / 3600.0),
    );
    let accessible = is_accessible(geo, dir);
    push(
        "accessible",
        accessible,
        if accessible {
            "baseline becomes perpendicular to the frame velocity".into()
        } else {
            "frame direction is inaccessible from this baseline".into()
        },
    );

    if schedule.kind == ScheduleKind::SplitDays && accessible && schedule.validate().is_ok() {
        let (aligned, detail) = match schedule.plan(geo, dir, None) {
            Ok(plan) => {
                let windows = perpendicularity_windows(geo, dir, rho.min(0.5), span + geo.sidereal_period())?;
                let central = schedule.guard_bins as usize;
                let misaligned = plan
                    .acquisitions
                    .iter()
                    .filter(|a| a.bin == central)
                    .filter(|a| {
                        let centre = 0.5 * (a.start + a.end);
                        !windows.iter().any(|&(s, e)| s <= centre && centre <= e && a.start < e && s < a.end)
                    })
                    .count();
                (
                    misaligned == 0,
                    format!("{misaligned} of {} daily windows miss a perpendicularity instant", schedule.days),
                )
            }
            Err(e) => (false, e.to_string()),
        };
        push("windows_aligned", aligned, detail);
    }

    Ok(ValidationReport {
        kind: schedule.kind,
        effective_dt: dt,
        threshold_dt,
        regime: Regime::from_drift_ratio(dt / threshold_dt),
        checks,
    })
}
