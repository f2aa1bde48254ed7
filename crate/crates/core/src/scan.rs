//! Named experiment presets, bound-curve sweeps and frame scans.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{
    drift_ratio, eval_bound, eval_bound_fast_limit, regime_threshold_dt, sample_curve, BoundCurve, BoundInputs,
    ChiPolicy, PreferredFrame, Regime,
};
use crate::budget::OpticalBudget;
use crate::consts::{CMB_BETA, CMB_CHI_DEG};
use crate::error::{Error, Result};
use crate::kinematics::SiteGeometry;
use crate::schedule::{build_split_days, build_standard, effective_dt, MeasurementSchedule};
use crate::sim::tally::sci;
use crate::units::Length;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    EgoRed,
    EgoGreen,
    TabletopBlue,
    Custom,
}

impl PresetName {
    pub const NAMED: [PresetName; 3] = [PresetName::EgoRed, PresetName::EgoGreen, PresetName::TabletopBlue];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::EgoRed => "ego_red",
            PresetName::EgoGreen => "ego_green",
            PresetName::TabletopBlue => "tabletop_blue",
            PresetName::Custom => "custom",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ego_red" => Ok(PresetName::EgoRed),
            "ego_green" => Ok(PresetName::EgoGreen),
            "tabletop_blue" => Ok(PresetName::TabletopBlue),
            "custom" => Ok(PresetName::Custom),
            other => Err(Error::UnknownPreset {
                name: other.to_string(),
                available: available_presets(),
            }),
        }
    }
}

fn available_presets() -> String {
    PresetName::NAMED.map(|n| n.as_str()).join(", ")
}

/// Everything needed to evaluate or simulate one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: PresetName,
    /// Path-mismatch ratio entering the bound.
    pub rho: f64,
    pub budget: OpticalBudget,
    pub schedule: MeasurementSchedule,
    pub chi_policy: ChiPolicy,
    pub site: SiteGeometry,
}

impl ExperimentPreset {
    pub fn inputs(&self) -> Result<BoundInputs> {
        BoundInputs::new(self.rho, effective_dt(&self.schedule))?.with_omega(self.site.omega)
    }

    pub fn curve(&self, beta_grid: &[f64]) -> Result<BoundCurve> {
        sample_curve(&self.inputs()?, self.chi_policy, beta_grid)
    }

    pub fn validate(&self) -> Result<()> {
        self.inputs()?;
        self.budget.validate()?;
        self.schedule.validate()?;
        self.site.validate()
    }
}

fn ego_budget() -> OpticalBudget {
    OpticalBudget {
        delta_d: Length(215e-6),
        d: Length(1175.0),
        lambda_d: Length(813e-9),
        dlambda_d: Length(70e-9),
        dlambda_f: Length(40e-9),
        extra_terms: Vec::new(),
        include_coherence: true,
    }
}

/// Looks up a named preset. `custom` has no defaults and is rejected.
pub fn preset(name: &str) -> Result<ExperimentPreset> {
    let name: PresetName = name.parse()?;
    let cmb = ChiPolicy::Fixed {
        chi: CMB_CHI_DEG.to_radians(),
    };
    let ego_site = SiteGeometry::east_west(1175.0);
    let p = match name {
        PresetName::EgoRed => ExperimentPreset {
            name,
            rho: 1.83e-7,
            budget: ego_budget(),
            schedule: build_split_days(4, 0.492)?,
            chi_policy: cmb,
            site: ego_site,
        },
        PresetName::EgoGreen => ExperimentPreset {
            name,
            rho: 1.83e-7,
            budget: ego_budget(),
            schedule: build_standard(20.0, 5.0)?,
            chi_policy: cmb,
            site: ego_site,
        },
        PresetName::TabletopBlue => ExperimentPreset {
            name,
            rho: 2.6e-5,
            budget: OpticalBudget {
                delta_d: Length(26e-6),
                d: Length(1.0),
                ..ego_budget()
            },
            schedule: build_standard(12.5, 0.0)?,
            chi_policy: ChiPolicy::WorstCase,
            site: SiteGeometry::east_west(1.0),
        },
        PresetName::Custom => {
            return Err(Error::Config(
                "preset `custom` needs explicit parameters (rho, schedule, chi policy)".into(),
            ))
        }
    };
    Ok(p)
}

/// A custom preset from explicit ρ and δt (standard single-cycle schedule).
pub fn custom_preset(rho: f64, delta_t: f64, chi_policy: ChiPolicy) -> Result<ExperimentPreset> {
    BoundInputs::new(rho, delta_t)?;
    let schedule = build_standard(delta_t / 8.0, 0.0)?;
    let mut budget = ego_budget();
    budget.d = Length(1.0);
    budget.delta_d = Length(rho);
    Ok(ExperimentPreset {
        name: PresetName::Custom,
        rho,
        budget,
        schedule,
        chi_policy,
        site: SiteGeometry::east_west(1.0),
    })
}

/// One bound curve per preset over a shared grid.
pub fn figure1(presets: &[ExperimentPreset], beta_grid: &[f64]) -> Result<Vec<(PresetName, BoundCurve)>> {
    presets
        .par_iter()
        .map(|p| Ok((p.name, p.curve(beta_grid)?)))
        .collect()
}

/// CSV with header `beta,<preset>,...`; failed samples are written as `nan`.
pub fn write_curves_csv<W: Write>(curves: &[(PresetName, BoundCurve)], mut out: W) -> io::Result<()> {
    let mut header = vec!["beta".to_string()];
    header.extend(curves.iter().map(|(n, _)| n.to_string()));
    writeln!(out, "{}", header.join(","))?;
    let Some((_, first)) = curves.first() else {
        return Ok(());
    };
    for (i, beta) in first.beta_grid.iter().enumerate() {
        let mut row = vec![sci(*beta)];
        row.extend(
            curves
                .iter()
                .map(|(_, c)| c.values[i].map_or_else(|| "nan".to_string(), sci)),
        );
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Bound at the CMB frame and how far it sits from the δt → 0 limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmbReport {
    pub preset: PresetName,
    pub rho: f64,
    pub delta_t: f64,
    pub frame: PreferredFrame,
    pub beta_t_max: f64,
    pub fast_limit: f64,
    /// beta_t_max / fast_limit.
    pub fast_limit_ratio: f64,
    /// (ω β sinχ δt / 2) / ρ.
    pub drift_ratio: f64,
    pub regime: Regime,
    pub threshold_dt: f64,
}

pub fn cmb_report(preset: &ExperimentPreset) -> Result<CmbReport> {
    let inputs = preset.inputs()?;
    let frame = PreferredFrame::new(CMB_BETA, preset.chi_policy.chi())?;
    let beta_t_max = eval_bound(&inputs, &frame)?;
    let fast_limit = eval_bound_fast_limit(inputs.rho, frame.beta)?;
    let ratio = drift_ratio(&inputs, &frame);
    Ok(CmbReport {
        preset: preset.name,
        rho: inputs.rho,
        delta_t: inputs.delta_t,
        frame,
        beta_t_max,
        fast_limit,
        fast_limit_ratio: beta_t_max / fast_limit,
        drift_ratio: ratio,
        regime: Regime::from_drift_ratio(ratio),
        threshold_dt: regime_threshold_dt(inputs.rho, inputs.omega)?,
    })
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Frame with β ∈ (0, beta_max] and sinχ = 1 that minimises the bound,
/// found by a log-grid search refined with golden-section steps.
pub fn worst_case_frame(preset: &ExperimentPreset, beta_max: f64) -> Result<(PreferredFrame, f64)> {
    if !(beta_max > 0.0 && beta_max < 1.0) {
        return Err(Error::domain(format!("beta_max = {beta_max} outside (0, 1)")));
    }
    let inputs = preset.inputs()?;
    let f = |beta: f64| {
        eval_bound(&inputs, &PreferredFrame { beta, chi: FRAC_PI_2 }).unwrap_or(f64::INFINITY)
    };
    let lo = beta_max * 1e-9;
    let n = 200;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { beta_max } else { lo * (beta_max / lo).powf(i as f64 / (n - 1) as f64) })
        .collect();
    let (imin, _) = grid
        .iter()
        .map(|&b| f(b))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let (mut a, mut b) = (grid[imin.saturating_sub(1)], grid[(imin + 1).min(n - 1)]);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    while (b - a) > 1e-6 * b {
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - GOLDEN * (b - a);
        d = a + GOLDEN * (b - a);
    }
    // The bracket ends are candidates too: the minimum often sits on beta_max.
    let beta = [a, b, 0.5 * (a + b), grid[imin]]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .expect("candidates");
    let frame = PreferredFrame { beta, chi: FRAC_PI_2 };
    Ok((frame, f(beta)))
}
