//! Exhaustive posterior tables over all alignments (tiny `n` only).

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::alignment::{enumerate_alignments, Alignment};
use crate::error::{Error, Result};
use crate::math::log_sum_exp;
use crate::metrics::{overlap_multi, Metric};

/// Every alignment with its log-weight, in enumeration order.
///
/// `log_partition` is the log-sum-exp of the weights, reduced sequentially in
/// enumeration order so it is bit-stable across thread counts.
#[derive(Debug, Clone)]
pub struct PosteriorTable {
    alignments: Vec<Alignment>,
    log_weights: Vec<f64>,
    log_partition: f64,
    index: HashMap<Alignment, usize>,
}

impl PosteriorTable {
    pub fn from_log_weights(alignments: Vec<Alignment>, log_weights: Vec<f64>) -> Result<Self> {
        if alignments.is_empty() {
            return Err(Error::EmptyTable);
        }
        if alignments.len() != log_weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} alignments vs {} weights",
                alignments.len(),
                log_weights.len()
            )));
        }
        let first = &alignments[0];
        for a in &alignments[1..] {
            first.same_shape(a)?;
        }
        let log_partition = log_sum_exp(&log_weights);
        let index = alignments
            .iter()
            .enumerate()
            .map(|(k, a)| (a.clone(), k))
            .collect();
        Ok(PosteriorTable {
            alignments,
            log_weights,
            log_partition,
            index,
        })
    }

    /// Enumerates `(S_n)^(p−1)` and evaluates `log_weight` on every alignment in parallel.
    pub fn build<F>(n: usize, p: usize, cap: u64, log_weight: F) -> Result<Self>
    where
        F: Fn(&Alignment) -> f64 + Sync,
    {
        let alignments: Vec<Alignment> = enumerate_alignments(n, p, cap)?.collect();
        let log_weights = alignments.par_iter().map(&log_weight).collect();
        Self::from_log_weights(alignments, log_weights)
    }

    /// Subtracts `offset` from every log-weight.
    pub fn rebased(mut self, offset: f64) -> Self {
        for w in &mut self.log_weights {
            *w -= offset;
        }
        self.log_partition = log_sum_exp(&self.log_weights);
        self
    }

    pub fn len(&self) -> usize {
        self.alignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alignments.is_empty()
    }

    pub fn n(&self) -> usize {
        self.alignments[0].n()
    }

    pub fn p(&self) -> usize {
        self.alignments[0].p()
    }

    pub fn alignments(&self) -> &[Alignment] {
        &self.alignments
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn position(&self, a: &Alignment) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn log_weight_of(&self, a: &Alignment) -> Option<f64> {
        self.position(a).map(|k| self.log_weights[k])
    }

    pub fn probability(&self, k: usize) -> f64 {
        (self.log_weights[k] - self.log_partition).exp()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.probability(k)).collect()
    }

    /// Log of the total weight in the closed ball `B(center, r)`; `-inf` if empty.
    pub fn restricted_log_partition(&self, center: &Alignment, r: f64, metric: Metric) -> Result<f64> {
        check_radius(r)?;
        center.same_shape(&self.alignments[0])?;
        let inside: Vec<f64> = self
            .alignments
            .iter()
            .zip(&self.log_weights)
            .filter(|(a, _)| {
                overlap_multi(center, a).expect("same shape").distance(metric) <= r + BALL_EPS
            })
            .map(|(_, &w)| w)
            .collect();
        Ok(log_sum_exp(&inside))
    }

    /// CSV with columns `alignment,log_weight,probability`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "alignment,log_weight,probability")?;
        for (k, a) in self.alignments.iter().enumerate() {
            writeln!(
                out,
                "{},{:.16e},{:.16e}",
                a.to_compact_string(),
                self.log_weights[k],
                self.probability(k)
            )?;
        }
        Ok(())
    }
}

/// Slack for closed balls: distances are ratios of small integers.
pub(crate) const BALL_EPS: f64 = 1e-12;

pub(crate) fn check_radius(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "[0, 1]",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_table() {
        let t = PosteriorTable::build(3, 2, 100, |_| 0.0).unwrap();
        assert_eq!(t.len(), 6);
        assert!((t.log_partition() - 6f64.ln()).abs() < 1e-12);
        let total: f64 = t.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let id = Alignment::identity(3, 2);
        assert_eq!(t.position(&id), Some(0));
        let z0 = t.restricted_log_partition(&id, 0.0, Metric::D).unwrap();
        assert!(z0.abs() < 1e-12);
        let z1 = t.restricted_log_partition(&id, 1.0, Metric::D).unwrap();
        assert!((z1 - t.log_partition()).abs() < 1e-12);
        assert!(t.restricted_log_partition(&id, 1.5, Metric::D).is_err());
    }

    #[test]
    fn empty_and_mismatched() {
        assert_eq!(
            PosteriorTable::from_log_weights(vec![], vec![]).unwrap_err(),
            Error::EmptyTable
        );
        assert!(PosteriorTable::from_log_weights(vec![Alignment::identity(3, 2)], vec![]).is_err());
    }

    #[test]
    fn csv_export() {
        let t = PosteriorTable::build(2, 2, 10, |a| if a.perm(1).is_identity() { 1.0 } else { 0.0 })
            .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "alignment,log_weight,probability");
        assert!(lines[1].starts_with("[1 2];[1 2],1.0000000000000000e0,"));
        assert_eq!(lines.len(), 3);
    }
}
