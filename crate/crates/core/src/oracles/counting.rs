//! Counting alignments with many pairwise fixed points.
//!
//! `F((d_ij)) = #{σ : d_ij(σ) ≥ d_ij for all i ≠ j}` is counted exhaustively
//! and compared with two closed-form upper bounds. Entries `d_ij = 0` are
//! allowed and contribute `0! = 1`.

use serde::Serialize;

use crate::alignment::{enumerate_alignments, Alignment};
use crate::error::{Error, Result};
use crate::math::log_factorials;
use crate::metrics::dij_matrix;
use crate::perm::Permutation;

/// Slack on the log scale when comparing an exact count with a bound that
/// may be attained with equality.
const LOG_TOL: f64 = 1e-9;

/// Upper-triangle `d_ij(σ)` of every alignment, so that many thresholds can
/// be counted against one enumeration.
#[derive(Debug, Clone)]
pub struct DijCache {
    n: usize,
    p: usize,
    rows: Vec<Vec<u16>>,
}

impl DijCache {
    pub fn new(n: usize, p: usize, truth: &Alignment, cap: u64) -> Result<Self> {
        if truth.n() != n || truth.p() != p {
            return Err(Error::DimensionMismatch("truth vs (n, p)".to_string()));
        }
        let rows = enumerate_alignments(n, p, cap)?
            .map(|sigma| {
                let d = dij_matrix(&sigma, truth).expect("same shape");
                upper(&d, p).map(|x| x as u16).collect()
            })
            .collect();
        Ok(DijCache { n, p, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `F((d_ij))`.
    pub fn count(&self, d: &[Vec<usize>]) -> Result<u64> {
        validate_thresholds(self.n, self.p, d)?;
        let want: Vec<u16> = upper(d, self.p).map(|x| x as u16).collect();
        Ok(self
            .rows
            .iter()
            .filter(|row| row.iter().zip(&want).all(|(have, need)| have >= need))
            .count() as u64)
    }
}

fn upper(d: &[Vec<usize>], p: usize) -> impl Iterator<Item = usize> + '_ {
    (0..p).flat_map(move |i| ((i + 1)..p).map(move |j| d[i][j]))
}

pub fn validate_thresholds(n: usize, p: usize, d: &[Vec<usize>]) -> Result<()> {
    if d.len() != p || d.iter().any(|r| r.len() != p) {
        return Err(Error::DimensionMismatch(format!("d must be {p} x {p}")));
    }
    for i in 0..p {
        for j in 0..p {
            if i != j && d[i][j] != d[j][i] {
                return Err(Error::InvalidParams(format!("d is not symmetric at ({}, {})", i + 1, j + 1)));
            }
            if i != j && d[i][j] > n {
                return Err(Error::InvalidParams(format!("d_{}{} = {} > n", i + 1, j + 1, d[i][j])));
            }
        }
    }
    Ok(())
}

/// Exhaustive `F((d_ij))` relative to `truth`.
pub fn count_f(n: usize, p: usize, d: &[Vec<usize>], truth: &Alignment, cap: u64) -> Result<u64> {
    validate_thresholds(n, p, d)?;
    DijCache::new(n, p, truth, cap)?.count(d)
}

/// `ln[(n!)^(p−1) / (Π_{i≠j} d_ij!)^(1/p)]`, product over ordered pairs.
pub fn usable_log_bound(n: usize, p: usize, d: &[Vec<usize>]) -> f64 {
    let lf = log_factorials(n);
    let mut pairs = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                pairs += lf[d[i][j]];
            }
        }
    }
    (p as f64 - 1.0) * lf[n] - pairs / p as f64
}

/// `D_i(τ) = max_{j<i} d_{τ(j)τ(i)}` for `i = 2..p` (returned zero-based from `i = 1`).
pub fn greedy_maxima(d: &[Vec<usize>], tau: &Permutation) -> Vec<usize> {
    (1..tau.len())
        .map(|i| (0..i).map(|j| d[tau.apply(j)][tau.apply(i)]).max().expect("j < i"))
        .collect()
}

/// `ln[(n!)^(p−1) / Π_{i≥2} D_i(τ)!]`.
pub fn permcount_log_bound(n: usize, d: &[Vec<usize>], tau: &Permutation) -> f64 {
    let lf = log_factorials(n);
    let p = tau.len();
    (p as f64 - 1.0) * lf[n] - greedy_maxima(d, tau).iter().map(|&x| lf[x]).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub count: u64,
    pub bound: f64,
    pub log_bound: f64,
    pub ok: bool,
}

impl BoundCheck {
    fn new(count: u64, log_bound: f64) -> Self {
        let ok = count == 0 || (count as f64).ln() <= log_bound + LOG_TOL;
        BoundCheck {
            count,
            bound: log_bound.exp(),
            log_bound,
            ok,
        }
    }
}

pub fn check_usable_bound(n: usize, p: usize, d: &[Vec<usize>], truth: &Alignment, cap: u64) -> Result<BoundCheck> {
    let count = count_f(n, p, d, truth, cap)?;
    Ok(BoundCheck::new(count, usable_log_bound(n, p, d)))
}

/// Same as [`check_usable_bound`] but reusing an enumeration.
pub fn check_usable_cached(cache: &DijCache, d: &[Vec<usize>]) -> Result<BoundCheck> {
    let count = cache.count(d)?;
    Ok(BoundCheck::new(count, usable_log_bound(cache.n, cache.p, d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermcountCheck {
    pub check: BoundCheck,
    /// `(1/p) Σ_{i≠j} ln d_ij!`.
    pub averaging_lhs: f64,
    /// `E_τ[Σ_{i≥2} ln D_i(τ)!]` over uniform `τ ∈ S_p`.
    pub averaging_rhs: f64,
    pub averaging_ok: bool,
}

/// The averaging step: the mean over all `τ ∈ S_p` of `Σ ln D_i(τ)!`
/// dominates `(1/p) Σ_{i≠j} ln d_ij!`.
pub fn averaging_inequality(n: usize, d: &[Vec<usize>]) -> (f64, f64) {
    let p = d.len();
    let lf = log_factorials(n);
    let mut lhs = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                lhs += lf[d[i][j]];
            }
        }
    }
    lhs /= p as f64;
    let taus = crate::alignment::all_permutations(p);
    let total: f64 = taus
        .iter()
        .map(|tau| greedy_maxima(d, tau).iter().map(|&x| lf[x]).sum::<f64>())
        .sum();
    (lhs, total / taus.len() as f64)
}

pub fn check_permcount_bound(
    n: usize,
    p: usize,
    d: &[Vec<usize>],
    tau: &Permutation,
    truth: &Alignment,
    cap: u64,
) -> Result<PermcountCheck> {
    let cache = DijCache::new(n, p, truth, cap)?;
    check_permcount_cached(&cache, d, tau)
}

pub fn check_permcount_cached(cache: &DijCache, d: &[Vec<usize>], tau: &Permutation) -> Result<PermcountCheck> {
    if tau.len() != cache.p {
        return Err(Error::DimensionMismatch(format!("tau must act on {} graphs", cache.p)));
    }
    let count = cache.count(d)?;
    let check = BoundCheck::new(count, permcount_log_bound(cache.n, d, tau));
    let (averaging_lhs, averaging_rhs) = averaging_inequality(cache.n, d);
    Ok(PermcountCheck {
        check,
        averaging_lhs,
        averaging_rhs,
        averaging_ok: averaging_lhs <= averaging_rhs + LOG_TOL,
    })
}

/// Every symmetric `p × p` threshold matrix with off-diagonal entries in
/// `0..=max` (diagonal set to `max`), in lexicographic order of the upper triangle.
pub fn symmetric_thresholds(p: usize, max: usize) -> Vec<Vec<Vec<usize>>> {
    let slots = p * (p - 1) / 2;
    let total = (max + 1).pow(slots as u32);
    (0..total)
        .map(|mut code| {
            let mut d = vec![vec![max; p]; p];
            let mut vals = vec![0; slots];
            for k in (0..slots).rev() {
                vals[k] = code % (max + 1);
                code /= max + 1;
            }
            let mut k = 0;
            for i in 0..p {
                for j in (i + 1)..p {
                    d[i][j] = vals[k];
                    d[j][i] = vals[k];
                    k += 1;
                }
            }
            d
        })
        .collect()
}
