//! Path-equalization error budget.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Length;

/// Optical-path uncertainty sources for one apparatus. All lengths in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalBudget {
    pub delta_d: Length,
    pub d: Length,
    pub lambda_d: Length,
    pub dlambda_d: Length,
    pub dlambda_f: Length,
    #[serde(default)]
    pub extra_terms: Vec<(String, Length)>,
    /// Whether the coherence length enters the quadrature sum.
    #[serde(default = "yes")]
    pub include_coherence: bool,
}

fn yes() -> bool {
    true
}

impl OpticalBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_d", self.delta_d),
            ("d", self.d),
            ("lambda_d", self.lambda_d),
            ("dlambda_d", self.dlambda_d),
            ("dlambda_f", self.dlambda_f),
        ] {
            if !(v.si() > 0.0 && v.si().is_finite()) {
                return Err(Error::domain(format!("{name} = {v} must be > 0")));
            }
        }
        if let Some((label, _)) = self.extra_terms.iter().find(|(_, v)| !(v.si() >= 0.0)) {
            return Err(Error::domain(format!("extra term `{label}` must be ≥ 0")));
        }
        Ok(())
    }

    /// Coherence length of the filtered down-converted photons.
    pub fn coherence_length(&self) -> Result<f64> {
        coherence_length(self.lambda_d.si(), self.dlambda_f.si())
    }

    /// Whether the filter, not the source, limits the coherence length.
    pub fn filter_limited(&self) -> bool {
        self.dlambda_f.si() <= self.dlambda_d.si()
    }

    /// All terms that enter the quadrature sum, labelled.
    pub fn terms(&self) -> Result<Vec<(String, f64)>> {
        let mut terms = vec![("delta_d".to_string(), self.delta_d.si())];
        if self.include_coherence {
            terms.push(("coherence_length".to_string(), self.coherence_length()?));
        }
        terms.extend(self.extra_terms.iter().map(|(l, v)| (l.clone(), v.si())));
        Ok(terms)
    }

    /// Quadrature-combined path uncertainty, meters.
    pub fn combined_delta_d(&self) -> Result<f64> {
        self.validate()?;
        let terms: Vec<f64> = self.terms()?.into_iter().map(|(_, v)| v).collect();
        combine_quadrature(&terms)
    }
}

/// ρ = Δd / d.
pub fn rho(delta_d: f64, d: f64) -> Result<f64> {
    if !(delta_d > 0.0 && d > 0.0 && delta_d < d && d.is_finite()) {
        return Err(Error::domain(format!(
            "rho needs 0 < delta_d < d (got delta_d = {delta_d} m, d = {d} m)"
        )));
    }
    Ok(delta_d / d)
}

/// Gaussian-spectrum coherence length 2 ln2 λ² / (π Δλ).
pub fn coherence_length(lambda_d: f64, dlambda_f: f64) -> Result<f64> {
    if !(lambda_d > 0.0 && dlambda_f > 0.0 && lambda_d.is_finite() && dlambda_f.is_finite()) {
        return Err(Error::domain(format!(
            "coherence length needs positive wavelength and bandwidth (got {lambda_d} m, {dlambda_f} m)"
        )));
    }
    Ok(2.0 * LN_2 * lambda_d * lambda_d / (PI * dlambda_f))
}

/// Euclidean norm of independent uncertainty terms.
pub fn combine_quadrature(terms: &[f64]) -> Result<f64> {
    if let Some(t) = terms.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::domain(format!("quadrature term {t} must be finite and ≥ 0")));
    }
    Ok(terms.iter().fold(0.0f64, |acc, t| acc.hypot(*t)))
}

/// ρ computed from the combined path uncertainty.
pub fn effective_rho(budget: &OpticalBudget) -> Result<f64> {
    rho(budget.combined_delta_d()?, budget.d.si())
}
