//! Rotating-baseline geometry and preferred-frame simultaneity.
//!
//! Axes are Earth-centred and non-rotating, with z along the rotation axis.
//! The Alice→Bob baseline keeps a fixed polar angle α and sweeps in azimuth
//! at ω. A preferred frame moves with reduced velocity β û relative to the
//! lab; û has polar angle θ_u and azimuth φ_u.
//!
//! With A = sinα sinθ_u and B = cosα cosθ_u the projection is
//! `b(t)·û = A cos(phase0 + ωt − φ_u) + B`, which is what most of this
//! module works from.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{check_beta, PreferredFrame};
use crate::consts::{EARTH_OMEGA, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn default_omega() -> f64 {
    EARTH_OMEGA
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteGeometry {
    /// Angle between the baseline and the rotation axis, radians.
    pub alpha: f64,
    /// Baseline length, meters.
    pub d: f64,
    /// Baseline hour angle at t = 0, radians.
    pub phase0: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

impl SiteGeometry {
    /// Builds a geometry, folding α ∈ (π/2, π) back onto (0, π/2].
    pub fn new(alpha: f64, d: f64, phase0: f64) -> Result<Self> {
        let alpha = if alpha > FRAC_PI_2 && alpha < PI {
            PI - alpha
        } else {
            alpha
        };
        let geo = SiteGeometry {
            alpha,
            d,
            phase0,
            omega: EARTH_OMEGA,
        };
        geo.validate()?;
        Ok(geo)
    }

    /// East-west baseline (α = π/2).
    pub fn east_west(d: f64) -> Self {
        SiteGeometry {
            alpha: FRAC_PI_2,
            d,
            phase0: 0.0,
            omega: EARTH_OMEGA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= FRAC_PI_2) {
            return Err(Error::domain(format!(
                "baseline polar angle {} rad outside (0, π/2]",
                self.alpha
            )));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::domain(format!("baseline length {} m must be > 0", self.d)));
        }
        if !self.phase0.is_finite() {
            return Err(Error::domain("phase0 must be finite"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::domain("omega must be > 0"));
        }
        Ok(())
    }

    pub fn sidereal_period(&self) -> f64 {
        TAU / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDirection {
    /// Polar angle from the rotation axis, radians.
    pub theta: f64,
    /// Azimuth, radians.
    pub phi: f64,
}

impl FrameDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let dir = FrameDirection { theta, phi };
        dir.validate()?;
        Ok(dir)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=PI).contains(&self.theta) || !self.phi.is_finite() {
            return Err(Error::domain(format!(
                "frame direction polar angle {} rad outside [0, π]",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn unit(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// A preferred frame with a full velocity direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingFrame {
    pub beta: f64,
    pub direction: FrameDirection,
}

impl MovingFrame {
    pub fn new(beta: f64, direction: FrameDirection) -> Result<Self> {
        check_beta(beta)?;
        direction.validate()?;
        Ok(MovingFrame { beta, direction })
    }

    /// Takes χ as the polar angle of the frame velocity. On an east-west
    /// baseline this makes sinχ the crossing-rate factor of the bound.
    pub fn from_preferred(frame: &PreferredFrame, phi: f64) -> Result<Self> {
        MovingFrame::new(frame.beta, FrameDirection::new(frame.chi, phi)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    /// Seconds.
    pub t: f64,
    /// Meters.
    pub x: Vec3,
}

impl SpacetimeEvent {
    pub fn new(t: f64, x: Vec3) -> Result<Self> {
        if !t.is_finite() || x.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("event components must be finite"));
        }
        Ok(SpacetimeEvent { t, x })
    }
}

pub fn lorentz_gamma(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(gamma_unchecked(beta))
}

fn gamma_unchecked(beta: f64) -> f64 {
    1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt()
}

pub fn baseline_direction(t: f64, geo: &SiteGeometry) -> Vec3 {
    let (sa, ca) = geo.alpha.sin_cos();
    let (sp, cp) = (geo.phase0 + geo.omega * t).sin_cos();
    [sa * cp, sa * sp, ca]
}

/// Projection coefficients (A, B) with b(t)·û = A cos ψ(t) + B.
fn projection_coeffs(geo: &SiteGeometry, dir: &FrameDirection) -> (f64, f64) {
    let a = geo.alpha.sin() * dir.theta.sin();
    let b = geo.alpha.cos() * dir.theta.cos();
    (a, b)
}

/// ψ(t) = phase0 + ωt − φ_u.
fn phase(t: f64, geo: &SiteGeometry, dir: &FrameDirection) -> f64 {
    geo.phase0 + geo.omega * t - dir.phi
}

/// b(t)·û.
pub fn baseline_projection(t: f64, geo: &SiteGeometry, dir: &FrameDirection) -> f64 {
    let (a, b) = projection_coeffs(geo, dir);
    a * phase(t, geo, dir).cos() + b
}

/// Preferred-frame time separation of B after A:
/// Δt′ = γ(Δt − β û·Δx / c).
pub fn simultaneity_mismatch(a: &SpacetimeEvent, b: &SpacetimeEvent, frame: &MovingFrame) -> f64 {
    mismatch_of(b.t - a.t, &sub(&b.x, &a.x), frame)
}

/// Same as [`simultaneity_mismatch`] on an explicit separation.
pub fn mismatch_of(dt: f64, dx: &Vec3, frame: &MovingFrame) -> f64 {
    let u = frame.direction.unit();
    gamma_unchecked(frame.beta) * (dt - frame.beta * dot(&u, dx) / SPEED_OF_LIGHT)
}

/// Minimum reduced speed of a signal linking the two events in the
/// preferred frame, |Δx′| / (c |Δt′|).
pub fn required_tachyon_beta(a: &SpacetimeEvent, b: &SpacetimeEvent, frame: &MovingFrame) -> Result<f64> {
    required_beta_for(b.t - a.t, &sub(&b.x, &a.x), frame)
}

/// Same as [`required_tachyon_beta`] on an explicit separation. Callers with
/// large absolute times should use this to keep sub-picosecond differences.
pub fn required_beta_for(dt: f64, dx: &Vec3, frame: &MovingFrame) -> Result<f64> {
    let dx_len = norm(dx);
    if dt == 0.0 && dx_len == 0.0 {
        return Err(Error::UndefinedPair);
    }
    let dt_prime = mismatch_of(dt, dx, frame);
    let c_dt = SPEED_OF_LIGHT * dt;
    // The interval |Δx|² − c²Δt² is the same in both frames.
    let interval = (dx_len - c_dt.abs()) * (dx_len + c_dt.abs());
    let c_dtp = SPEED_OF_LIGHT * dt_prime.abs();
    if c_dtp == 0.0 {
        return Ok(f64::INFINITY);
    }
    let v = if interval >= 0.0 {
        1.0f64.hypot(interval.sqrt() / c_dtp)
    } else {
        (1.0 - (-interval).sqrt() / c_dtp).max(0.0).sqrt() * (1.0 + (-interval).sqrt() / c_dtp).sqrt()
    };
    Ok(if v.is_finite() { v } else { f64::INFINITY })
}

/// Whether the rotating baseline ever becomes perpendicular to û.
pub fn is_accessible(geo: &SiteGeometry, dir: &FrameDirection) -> bool {
    let (a, b) = projection_coeffs(geo, dir);
    b.abs() <= a
}

/// Crossing-rate factor √(A² − B²): |d(b·û)/dt| / ω at a perpendicularity
/// instant. Plays the role of sinχ in the bound. `None` when inaccessible.
pub fn effective_sin_chi(geo: &SiteGeometry, dir: &FrameDirection) -> Option<f64> {
    let (a, b) = projection_coeffs(geo, dir);
    (b.abs() <= a).then(|| ((a - b.abs()) * (a + b.abs())).sqrt())
}

/// First instant at or after `after` when b(t) ⟂ û.
///
/// For a direction that stays perpendicular at all times, returns `after`.
pub fn next_crossing(geo: &SiteGeometry, dir: &FrameDirection, after: f64) -> Option<f64> {
    let (a, b) = projection_coeffs(geo, dir);
    if a <= f64::EPSILON {
        return (b.abs() <= f64::EPSILON).then_some(after);
    }
    if b.abs() > a {
        return None;
    }
    let root = (-b / a).clamp(-1.0, 1.0).acos();
    let psi_after = phase(after, geo, dir);
    [root, TAU - root]
        .iter()
        .map(|&r| {
            let k = ((psi_after - r) / TAU).ceil();
            after + (r + k * TAU - psi_after) / geo.omega
        })
        .map(|t| t.max(after))
        .min_by(f64::total_cmp)
}

/// Time intervals within `[0, horizon]` where |b(t)·û| ≤ `tolerance_cos`.
///
/// Intervals are sorted and disjoint; windows that touch across a sidereal
/// day boundary are merged.
pub fn perpendicularity_windows(
    geo: &SiteGeometry,
    dir: &FrameDirection,
    tolerance_cos: f64,
    horizon: f64,
) -> Result<Vec<(f64, f64)>> {
    geo.validate()?;
    dir.validate()?;
    if !(tolerance_cos > 0.0 && tolerance_cos < 1.0) {
        return Err(Error::domain(format!(
            "tolerance_cos = {tolerance_cos} outside (0, 1)"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain("horizon must be > 0"));
    }
    let (a, b) = projection_coeffs(geo, dir);
    if a <= f64::EPSILON {
        return Ok(if b.abs() <= tolerance_cos {
            vec![(0.0, horizon)]
        } else {
            Vec::new()
        });
    }
    let lo = (-tolerance_cos - b) / a;
    let hi = (tolerance_cos - b) / a;
    if hi < -1.0 || lo > 1.0 {
        return Ok(Vec::new());
    }
    if lo <= -1.0 && hi >= 1.0 {
        return Ok(vec![(0.0, horizon)]);
    }
    let p = hi.min(1.0).acos();
    let q = lo.max(-1.0).acos();
    let arcs = [(p, q), (TAU - q, TAU - p)];

    let psi0 = phase(0.0, geo, dir);
    let psi1 = phase(horizon, geo, dir);
    let k_lo = (psi0 / TAU).floor() as i64 - 1;
    let k_hi = (psi1 / TAU).ceil() as i64 + 1;
    let mut raw: Vec<(f64, f64)> = (k_lo..=k_hi)
        .flat_map(|k| {
            arcs.iter().map(move |&(s, e)| {
                let off = k as f64 * TAU;
                ((s + off - psi0) / geo.omega, (e + off - psi0) / geo.omega)
            })
        })
        .map(|(s, e)| (s.max(0.0), e.min(horizon)))
        .filter(|(s, e)| e > s)
        .collect();
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (s, e) in raw {
        match merged.last_mut() {
            Some(last) if s <= last.1 + 1e-9 * geo.sidereal_period() => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    Ok(merged)
}

/// The instant in `[t0, t1]` where |b(t)·û| is largest, and that value.
pub fn max_abs_projection(geo: &SiteGeometry, dir: &FrameDirection, t0: f64, t1: f64) -> (f64, f64) {
    let mut best = (t0, baseline_projection(t0, geo, dir).abs());
    let mut consider = |t: f64| {
        let v = baseline_projection(t, geo, dir).abs();
        if v > best.1 {
            best = (t, v);
        }
    };
    consider(t1);
    // Interior extrema of A cos ψ + B sit at ψ = kπ.
    let (p0, p1) = (phase(t0, geo, dir), phase(t1, geo, dir));
    let mut k = (p0 / PI).ceil();
    while k * PI <= p1 {
        consider(t0 + (k * PI - p0) / geo.omega);
        k += 1.0;
    }
    best
}

/// Fraction of isotropic frame directions the baseline never becomes
/// perpendicular to: two polar caps of half-angle π/2 − α, i.e. 1 − sin α.
pub fn inaccessible_fraction(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= FRAC_PI_2) {
        return Err(Error::domain(format!("alpha = {alpha} rad outside (0, π/2]")));
    }
    Ok(if alpha == FRAC_PI_2 { 0.0 } else { 1.0 - alpha.sin() })
}

/// Inverse of [`inaccessible_fraction`].
pub fn alpha_for_fraction(fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::domain(format!("fraction = {fraction} outside [0, 1)")));
    }
    Ok((1.0 - fraction).asin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageEstimate {
    pub fraction: f64,
    /// Binomial standard error.
    pub stderr: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 1 << 16;

/// Monte Carlo estimate of [`inaccessible_fraction`] from isotropic
/// directions. Chunks use independent ChaCha8 streams, so the result does
/// not depend on the thread count.
pub fn inaccessible_fraction_mc(alpha: f64, samples: u64, seed: u64) -> Result<CoverageEstimate> {
    let geo = SiteGeometry::new(alpha, 1.0, 0.0)?;
    if samples == 0 {
        return Err(Error::domain("Monte Carlo needs at least one sample"));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            (0..n)
                .filter(|_| {
                    let z: f64 = rng.random_range(-1.0..=1.0);
                    let phi: f64 = rng.random_range(0.0..TAU);
                    let dir = FrameDirection { theta: z.acos(), phi };
                    !is_accessible(&geo, &dir)
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(CoverageEstimate {
        fraction: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}
