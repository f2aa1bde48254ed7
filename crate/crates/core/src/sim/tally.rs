//! Per-bin, per-setting coincidence tallies and their exports.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::chsh::{BellEstimate, Counts};
use crate::schedule::SettingPair;

/// Generator used for every simulation stream.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), one stream per acquisition";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceTally {
    /// Ordered, non-overlapping bin boundaries in seconds.
    pub bins: Vec<(f64, f64)>,
    /// Distinct setting pairs, in first-use order.
    pub settings: Vec<SettingPair>,
    /// `counts[bin][setting]`.
    pub counts: Vec<Vec<Counts>>,
    pub pairs: u64,
    /// Pairs the hypothetical signal could not link in time.
    pub disconnected: u64,
    pub seed: u64,
    pub rng: String,
}

impl CoincidenceTally {
    pub fn empty(bins: Vec<(f64, f64)>, settings: Vec<SettingPair>, seed: u64) -> Self {
        let counts = vec![vec![Counts::default(); settings.len()]; bins.len()];
        CoincidenceTally {
            bins,
            settings,
            counts,
            pairs: 0,
            disconnected: 0,
            seed,
            rng: RNG_ALGORITHM.to_string(),
        }
    }

    /// Adds another tally over the same bins and settings.
    pub fn merge(&mut self, other: &CoincidenceTally) {
        debug_assert_eq!(self.bins.len(), other.bins.len());
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += *o;
            }
        }
        self.pairs += other.pairs;
        self.disconnected += other.disconnected;
    }

    /// Counts summed per CHSH slot within one bin.
    pub fn slot_counts(&self, bin: usize) -> [Counts; 4] {
        let mut slots = [Counts::default(); 4];
        for (setting, c) in self.settings.iter().zip(&self.counts[bin]) {
            slots[setting.slot] += *c;
        }
        slots
    }

    /// Counts per setting summed over all bins.
    pub fn setting_totals(&self) -> Vec<Counts> {
        let mut totals = vec![Counts::default(); self.settings.len()];
        for row in &self.counts {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += *c;
            }
        }
        totals
    }

    /// One estimate per bin with data for all four correlators.
    pub fn estimate_series(&self) -> Vec<BellEstimate> {
        (0..self.bins.len())
            .filter_map(|bin| BellEstimate::from_slots(bin, self.bins[bin], &self.slot_counts(bin)).ok())
            .collect()
    }

    /// A single estimate pooling every bin.
    pub fn aggregate_estimate(&self) -> crate::error::Result<BellEstimate> {
        let mut slots = [Counts::default(); 4];
        for bin in 0..self.bins.len() {
            for (s, c) in slots.iter_mut().zip(self.slot_counts(bin)) {
                *s += c;
            }
        }
        let span = (
            self.bins.first().map_or(0.0, |b| b.0),
            self.bins.last().map_or(0.0, |b| b.1),
        );
        BellEstimate::from_slots(0, span, &slots)
    }

    /// CSV with columns `bin_start,bin_end,setting_a,setting_b,n_pp,n_pm,n_mp,n_mm`.
    /// Times in seconds, angles in radians.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_start,bin_end,setting_a,setting_b,n_pp,n_pm,n_mp,n_mm")?;
        for ((start, end), row) in self.bins.iter().zip(&self.counts) {
            for (s, c) in self.settings.iter().zip(row) {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    sci(*start),
                    sci(*end),
                    sci(s.a.si()),
                    sci(s.b.si()),
                    c.pp,
                    c.pm,
                    c.mp,
                    c.mm
                )?;
            }
        }
        Ok(())
    }
}

/// CSV with columns `bin,bin_start,bin_end,e_ab,e_abp,e_apb,e_apbp,s,stderr`.
pub fn write_estimates_csv<W: Write>(series: &[BellEstimate], mut out: W) -> io::Result<()> {
    writeln!(out, "bin,bin_start,bin_end,e_ab,e_abp,e_apb,e_apbp,s,stderr")?;
    for e in series {
        let [e1, e2, e3, e4] = e.correlators;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            e.bin,
            sci(e.bin_start),
            sci(e.bin_end),
            sci(e1),
            sci(e2),
            sci(e3),
            sci(e4),
            sci(e.s),
            sci(e.stderr)
        )?;
    }
    Ok(())
}

/// Scientific notation with 9 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Angle;

    fn pair(slot: usize) -> SettingPair {
        SettingPair {
            a: Angle(0.1 * slot as f64),
            b: Angle(0.2),
            slot,
        }
    }

    #[test]
    fn merge_is_commutative() {
        let settings: Vec<_> = (0..4).map(pair).collect();
        let mut a = CoincidenceTally::empty(vec![(0.0, 1.0)], settings.clone(), 1);
        let mut b = a.clone();
        a.counts[0][1] = Counts::new(1, 2, 3, 4);
        a.pairs = 10;
        b.counts[0][1] = Counts::new(5, 0, 0, 1);
        b.pairs = 6;
        b.disconnected = 2;
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.counts[0][1], Counts::new(6, 2, 3, 5));
        assert_eq!(ab.pairs, 16);
    }

    #[test]
    fn csv_layout() {
        let mut t = CoincidenceTally::empty(vec![(0.0, 0.5)], vec![pair(0)], 3);
        t.counts[0][0] = Counts::new(7, 1, 2, 9);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "bin_start,bin_end,setting_a,setting_b,n_pp,n_pm,n_mp,n_mm");
        assert_eq!(lines[1], "0.00000000e0,5.00000000e-1,0.00000000e0,2.00000000e-1,7,1,2,9");
    }

    #[test]
    fn incomplete_bins_are_skipped() {
        let settings: Vec<_> = (0..4).map(pair).collect();
        let mut t = CoincidenceTally::empty(vec![(0.0, 1.0), (1.0, 2.0)], settings, 0);
        for s in 0..4 {
            t.counts[0][s] = Counts::new(3, 1, 1, 3);
        }
        t.counts[1][0] = Counts::new(3, 1, 1, 3);
        let series = t.estimate_series();
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].bin, 0);
    }
}
