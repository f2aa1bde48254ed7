//! CHSH estimators over coincidence counts.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coincidence counts for one setting pair: n(++), n(+−), n(−+), n(−−).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl Counts {
    pub fn new(pp: u64, pm: u64, mp: u64, mm: u64) -> Self {
        Counts { pp, pm, mp, mm }
    }

    pub fn total(&self) -> u64 {
        self.pp + self.pm + self.mp + self.mm
    }

    pub fn record(&mut self, a_plus: bool, b_plus: bool) {
        match (a_plus, b_plus) {
            (true, true) => self.pp += 1,
            (true, false) => self.pm += 1,
            (false, true) => self.mp += 1,
            (false, false) => self.mm += 1,
        }
    }

    /// Fraction of + outcomes at Alice.
    pub fn marginal_a(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| (self.pp + self.pm) as f64 / n as f64)
    }

    /// Fraction of + outcomes at Bob.
    pub fn marginal_b(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| (self.pp + self.mp) as f64 / n as f64)
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.pp += o.pp;
        self.pm += o.pm;
        self.mp += o.mp;
        self.mm += o.mm;
    }
}

/// Correlator (n₊₊ + n₋₋ − n₊₋ − n₋₊) / n.
#[allow(non_snake_case)]
pub fn chsh_E(counts: &Counts) -> Result<f64> {
    let n = counts.total();
    if n == 0 {
        return Err(Error::InsufficientStatistics("no coincidences for this setting pair".into()));
    }
    let same = (counts.pp + counts.mm) as f64;
    let diff = (counts.pm + counts.mp) as f64;
    Ok((same - diff) / n as f64)
}

/// Binomial standard error of a correlator estimated from `n` events.
pub fn correlator_stderr(e: f64, n: u64) -> f64 {
    ((1.0 - e * e).max(0.0) / n as f64).sqrt()
}

/// S = |E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)|.
#[allow(non_snake_case)]
pub fn chsh_S(e_ab: f64, e_abp: f64, e_apb: f64, e_apbp: f64) -> Result<f64> {
    if [e_ab, e_abp, e_apb, e_apbp].iter().any(|e| !(e.abs() <= 1.0)) {
        return Err(Error::domain("correlators must satisfy |E| ≤ 1"));
    }
    Ok((e_ab - e_abp + e_apb + e_apbp).abs())
}

/// Bell-parameter estimate for one time bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellEstimate {
    pub bin: usize,
    pub bin_start: f64,
    pub bin_end: f64,
    /// E(a,b), E(a,b′), E(a′,b), E(a′,b′).
    pub correlators: [f64; 4],
    pub events: [u64; 4],
    pub s: f64,
    pub stderr: f64,
}

impl BellEstimate {
    /// Builds an estimate from per-slot counts; fails if any slot is empty.
    pub fn from_slots(bin: usize, bounds: (f64, f64), slots: &[Counts; 4]) -> Result<Self> {
        let mut correlators = [0.0; 4];
        let mut events = [0u64; 4];
        let mut var = 0.0;
        for (i, c) in slots.iter().enumerate() {
            correlators[i] = chsh_E(c)?;
            events[i] = c.total();
            var += correlator_stderr(correlators[i], events[i]).powi(2);
        }
        let [e1, e2, e3, e4] = correlators;
        Ok(BellEstimate {
            bin,
            bin_start: bounds.0,
            bin_end: bounds.1,
            correlators,
            events,
            s: chsh_S(e1, e2, e3, e4)?,
            stderr: var.sqrt(),
        })
    }
}

/// Bins whose S sits more than three standard errors below `threshold`.
pub fn detect_drop(series: &[BellEstimate], threshold: f64) -> Result<Vec<usize>> {
    if series.is_empty() {
        return Err(Error::InsufficientStatistics("empty estimate series".into()));
    }
    Ok(series
        .iter()
        .filter(|e| e.s + 3.0 * e.stderr < threshold)
        .map(|e| e.bin)
        .collect())
}
