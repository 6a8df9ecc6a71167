//! Exact posterior of the correlated Erdős–Rényi model through edge type counts.
//!
//! Under a candidate `π`, an edge `e` has type `b(e) = {i : π_i⁻¹(e) ∈ 𝒢^(i)}`.
//! The likelihood factorises over edges, so the posterior depends on `π` only
//! through the counts `e_X = #{e : b(e) = X}`.

use serde::Serialize;

use crate::alignment::Alignment;
use crate::edge::{EdgeIndex, EdgeSet};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::{intersection_union_graph, ErObservation, ErParams};
use crate::perm::Permutation;
use crate::posterior::PosteriorTable;

/// Graph counts above this do not fit a `u32` type mask.
pub const MAX_GRAPHS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TypeCounts {
    p: usize,
    counts: Vec<u64>,
}

impl TypeCounts {
    pub fn p(&self) -> usize {
        self.p
    }

    /// `e_X` for the bitmask `X` (bit `i` is graph `i`, zero-based).
    pub fn get(&self, mask: u32) -> u64 {
        self.counts[mask as usize]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `Σ_{X≠∅} e_X`, the number of edges present in some aligned graph.
    pub fn nonempty_total(&self) -> u64 {
        self.counts[1..].iter().sum()
    }
}

fn check_sets(observed: &[EdgeSet], pi: &Alignment) -> Result<EdgeIndex> {
    let index = EdgeIndex::new(pi.n());
    if observed.len() != pi.p() || observed.iter().any(|s| s.capacity() != index.len()) {
        return Err(Error::DimensionMismatch(format!(
            "expected {} edge sets over {} edges",
            pi.p(),
            index.len()
        )));
    }
    if pi.p() > MAX_GRAPHS {
        return Err(Error::InvalidParams(format!("p = {} > {MAX_GRAPHS}", pi.p())));
    }
    Ok(index)
}

/// Type mask of every edge, by one membership test per graph.
pub(crate) fn edge_masks(index: &EdgeIndex, observed: &[EdgeSet], pi: &Alignment) -> Vec<u32> {
    let inverses: Vec<Permutation> = pi.perms().iter().map(|q| q.inverse()).collect();
    (0..index.len())
        .map(|e| {
            inverses
                .iter()
                .zip(observed)
                .enumerate()
                .filter(|(_, (inv, set))| set.contains(index.permute(inv, e)))
                .fold(0u32, |m, (i, _)| m | 1 << i)
        })
        .collect()
}

pub fn type_counts(observed: &[EdgeSet], pi: &Alignment) -> Result<TypeCounts> {
    let index = check_sets(observed, pi)?;
    let mut counts = vec![0u64; 1 << pi.p()];
    for m in edge_masks(&index, observed, pi) {
        counts[m as usize] += 1;
    }
    Ok(TypeCounts { p: pi.p(), counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErEnergyReport {
    /// `Σ_{X≠∅} e_X ln(P_X / P_∅)`: the log-posterior up to a `π`-independent constant.
    pub log_posterior_unnormalized: f64,
    /// `ℋ(π)` with its per-type correction factors; `−ln n · ℋ` is the log-posterior above.
    pub hamiltonian_exact: f64,
    /// `Σ_{X≠∅} e_X`, the leading-order energy.
    pub hamiltonian_asymptotic: f64,
    pub edge_total: u64,
}

/// `ln(P_X / P_∅)` for every mask, with `0` at the empty mask.
pub fn type_log_ratios(params: &ErParams) -> Result<Vec<f64>> {
    params.validate()?;
    if params.p > MAX_GRAPHS {
        return Err(Error::InvalidParams(format!("p = {} > {MAX_GRAPHS}", params.p)));
    }
    let empty = params.pattern_probability(0);
    if !(empty > 0.0) {
        return Err(Error::InvalidParams(
            "the empty edge pattern has zero probability".to_string(),
        ));
    }
    Ok((0..1u32 << params.p)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                (params.pattern_probability(m) / empty).ln()
            }
        })
        .collect())
}

fn log_n(params: &ErParams) -> Result<f64> {
    if params.n < 3 {
        return Err(Error::InvalidParams(format!(
            "n = {} < 3 makes ln n degenerate",
            params.n
        )));
    }
    Ok((params.n as f64).ln())
}

/// Per-type factor `c_X = 1 − ln(λ s^|X| (1−s)^(p−|X|) / P_∅) / ln n`, so that
/// `ℋ = Σ_{X≠∅} c_X e_X`.
pub fn correction_factor(params: &ErParams, mask: u32) -> Result<f64> {
    let ratios = type_log_ratios(params)?;
    Ok(-ratios[mask as usize] / log_n(params)?)
}

/// Energy of each type mask: `−ln(P_X/P_∅) / ln n`.
pub(crate) fn type_energies(params: &ErParams) -> Result<Vec<f64>> {
    let ln_n = log_n(params)?;
    Ok(type_log_ratios(params)?.iter().map(|r| -r / ln_n).collect())
}

pub fn er_log_posterior(observed: &[EdgeSet], pi: &Alignment, params: &ErParams) -> Result<ErEnergyReport> {
    if pi.n() != params.n || pi.p() != params.p {
        return Err(Error::DimensionMismatch("alignment vs params".to_string()));
    }
    let ln_n = log_n(params)?;
    let ratios = type_log_ratios(params)?;
    let counts = type_counts(observed, pi)?;
    let log_post: f64 = (1..counts.counts.len())
        .map(|m| counts.counts[m] as f64 * ratios[m])
        .sum();
    Ok(ErEnergyReport {
        log_posterior_unnormalized: log_post,
        hamiltonian_exact: -log_post / ln_n,
        hamiltonian_asymptotic: counts.nonempty_total() as f64,
        edge_total: counts.nonempty_total(),
    })
}

/// Exhaustive table of unnormalized log-posteriors.
pub fn posterior_table(obs: &ErObservation, cap: u64) -> Result<PosteriorTable> {
    let params = obs.params;
    let ratios = type_log_ratios(&params)?;
    log_n(&params)?;
    let index = EdgeIndex::new(params.n);
    PosteriorTable::build(params.n, params.p, cap, |pi| {
        edge_masks(&index, &obs.observed, pi)
            .iter()
            .map(|&m| ratios[m as usize])
            .sum()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub ok: bool,
    /// `Σ_{X≠∅} e_X(π)`.
    pub before: f64,
    /// `Σ_{X≠∅} e_X((π₁, σπ₂, …, σπ_p))`.
    pub after: f64,
}

/// Checks that `(Id, σ, …, σ)` does not increase the number of present edges,
/// for `σ` an automorphism of `𝒢^(1) ∩ ⋃_{i≥2} π_i(𝒢^(i))`.
pub fn check_automorphism_monotonicity(
    observed: &[EdgeSet],
    pi: &Alignment,
    sigma: &Permutation,
) -> Result<MonotonicityReport> {
    let index = check_sets(observed, pi)?;
    if sigma.len() != pi.n() {
        return Err(Error::DimensionMismatch("sigma vs alignment".to_string()));
    }
    let h = intersection_union_graph(observed, pi)?;
    if !Graph::from_edge_set(&index, &h).is_automorphism(sigma) {
        return Err(Error::NotAnAutomorphism("the intersection graph"));
    }
    let before = type_counts(observed, pi)?.nonempty_total() as f64;
    let moved = pi.left_compose_tail(sigma)?;
    let after = type_counts(observed, &moved)?.nonempty_total() as f64;
    Ok(MonotonicityReport {
        ok: after <= before,
        before,
        after,
    })
}
