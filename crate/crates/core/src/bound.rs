//! Closed-form lower bound on the reduced tachyon speed.
//!
//! For an apparatus with path-mismatch ratio ρ = Δd/d and a Bell-parameter
//! measurement lasting δt, a candidate preferred frame moving at reduced
//! speed β with orientation χ is constrained to
//!
//! ```text
//! β_t,max = √(1 + (1 − β²)(1 − ρ²) / [ρ + ω β sinχ δt / 2]²)
//! ```
//!
//! where ω is the Earth angular velocity.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::consts::{CMB_BETA, CMB_CHI_DEG, EARTH_OMEGA};
use crate::error::{Error, Result};

/// A candidate preferred frame: reduced speed and orientation angle.
///
/// Only `sin(chi)` enters the bound, so `chi` is kept in `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferredFrame {
    pub beta: f64,
    /// Radians.
    pub chi: f64,
}

impl PreferredFrame {
    pub fn new(beta: f64, chi: f64) -> Result<Self> {
        let frame = PreferredFrame { beta, chi };
        frame.validate()?;
        Ok(frame)
    }

    pub fn cmb() -> Self {
        PreferredFrame {
            beta: CMB_BETA,
            chi: CMB_CHI_DEG.to_radians(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if !(0.0..=std::f64::consts::PI).contains(&self.chi) {
            return Err(Error::domain(format!(
                "chi = {} rad outside [0, π]",
                self.chi
            )));
        }
        Ok(())
    }

    pub fn sin_chi(&self) -> f64 {
        self.chi.sin().clamp(0.0, 1.0)
    }
}

/// Apparatus parameters entering the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub rho: f64,
    /// Seconds.
    pub delta_t: f64,
    /// rad/s.
    pub omega: f64,
}

impl BoundInputs {
    pub fn new(rho: f64, delta_t: f64) -> Result<Self> {
        let inputs = BoundInputs {
            rho,
            delta_t,
            omega: EARTH_OMEGA,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        self.omega = omega;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        if !(self.delta_t >= 0.0 && self.delta_t.is_finite()) {
            return Err(Error::domain(format!(
                "delta_t = {} s must be finite and ≥ 0",
                self.delta_t
            )));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::domain(format!("omega = {} must be > 0", self.omega)));
        }
        Ok(())
    }
}

/// How χ is chosen when sampling a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ChiPolicy {
    /// Use this orientation angle (radians) for every sample.
    Fixed { chi: f64 },
    /// sinχ = 1 for every sample.
    WorstCase,
}

impl ChiPolicy {
    pub fn chi(&self) -> f64 {
        match *self {
            ChiPolicy::Fixed { chi } => chi,
            ChiPolicy::WorstCase => FRAC_PI_2,
        }
    }
}

/// β ↦ β_t,max sampled on a grid. Samples that failed evaluation are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub beta_grid: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub inputs: BoundInputs,
    pub chi_policy: ChiPolicy,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if (0.0..1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::domain(format!("beta = {beta} outside [0, 1)")))
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("rho = {rho} outside (0, 1)")))
    }
}

/// Evaluates the lower bound β_t,max.
///
/// Returns `f64::INFINITY` when ρ is so small that the result overflows.
pub fn eval_bound(inputs: &BoundInputs, frame: &PreferredFrame) -> Result<f64> {
    inputs.validate()?;
    frame.validate()?;
    Ok(bound_unchecked(
        inputs.rho,
        inputs.delta_t,
        inputs.omega,
        frame.beta,
        frame.sin_chi(),
    ))
}

pub(crate) fn bound_unchecked(rho: f64, delta_t: f64, omega: f64, beta: f64, sin_chi: f64) -> f64 {
    let denom = rho + 0.5 * omega * beta * sin_chi * delta_t;
    // (1 − x²) as (1 − x)(1 + x) keeps precision near x = 1.
    let numer = ((1.0 - beta) * (1.0 + beta) * (1.0 - rho) * (1.0 + rho)).sqrt();
    let ratio = numer / denom;
    if !ratio.is_finite() {
        return f64::INFINITY;
    }
    1.0f64.hypot(ratio).max(1.0)
}

/// The δt → 0 limit, √(1 − β²)/ρ.
pub fn eval_bound_fast_limit(rho: f64, beta: f64) -> Result<f64> {
    check_rho(rho)?;
    check_beta(beta)?;
    let v = ((1.0 - beta) * (1.0 + beta)).sqrt() / rho;
    Ok(if v.is_finite() { v } else { f64::INFINITY })
}

/// The measurement duration 2ρ/ω below which the bound is flat in β.
pub fn regime_threshold_dt(rho: f64, omega: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("rho = {rho} must be > 0")));
    }
    if !(omega > 0.0) {
        return Err(Error::domain(format!("omega = {omega} must be > 0")));
    }
    Ok(2.0 * rho / omega)
}

/// Whether the Earth-rotation drift term is small next to ρ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Flat,
    BetaDegraded,
}

impl Regime {
    /// Classifies by the ratio of the drift term to ρ; flat below 1.
    pub fn from_drift_ratio(ratio: f64) -> Self {
        if ratio < 1.0 {
            Regime::Flat
        } else {
            Regime::BetaDegraded
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Flat => "flat regime",
            Regime::BetaDegraded => "β-degraded regime",
        }
    }
}

/// Ratio (ω β sinχ δt / 2) / ρ for a particular frame.
pub fn drift_ratio(inputs: &BoundInputs, frame: &PreferredFrame) -> f64 {
    0.5 * inputs.omega * frame.beta * frame.sin_chi() * inputs.delta_t / inputs.rho
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi < 1.0) || n < 2 {
        return Err(Error::domain(format!(
            "log grid needs 0 < lo < hi < 1 and n ≥ 2 (got {lo}, {hi}, {n})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

/// 200 log-spaced points in [10⁻⁶, 0.999].
pub fn default_beta_grid() -> Vec<f64> {
    log_grid(1e-6, 0.999, 200).expect("static grid bounds are valid")
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("empty beta grid"));
    }
    if grid.iter().any(|b| !(0.0..1.0).contains(b)) {
        return Err(Error::domain("beta grid values must lie in [0, 1)"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("beta grid must be strictly increasing"));
    }
    Ok(())
}

/// Evaluates the bound at every grid point.
pub fn sample_curve(inputs: &BoundInputs, chi_policy: ChiPolicy, beta_grid: &[f64]) -> Result<BoundCurve> {
    inputs.validate()?;
    check_grid(beta_grid)?;
    let chi = chi_policy.chi();
    let values = beta_grid
        .iter()
        .map(|&beta| eval_bound(inputs, &PreferredFrame { beta, chi }).ok())
        .collect();
    Ok(BoundCurve {
        beta_grid: beta_grid.to_vec(),
        values,
        inputs: *inputs,
        chi_policy,
    })
}
