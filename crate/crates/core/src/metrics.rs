//! Overlaps and distances between alignments, and the pairwise fixed-point
//! statistics `d_ij`, `D_ij`, `c_ij`.
//!
//! Throughout, the relative permutation between graphs `i` and `j` under a
//! candidate `σ` and truth `π*` is
//!
//! ```text
//! σ_ij = (π_j*)⁻¹ ∘ σ_j ∘ σ_i⁻¹ ∘ π_i*
//! ```
//!
//! so that `σ_ij = Id` iff `σ_i⁻¹π_i*` and `σ_j⁻¹π_j*` agree, and the fixed
//! points of `σ_ij` are exactly the agreements that define `ov_c`.

use serde::{Deserialize, Serialize};

use crate::alignment::Alignment;
use crate::edge::EdgeIndex;
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Distances available for balls and concentration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    D,
    Dw,
    Dc,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" => Ok(Metric::D),
            "d_w" | "dw" => Ok(Metric::Dw),
            "d_c" | "dc" => Ok(Metric::Dc),
            other => Err(Error::InvalidParams(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub ov: f64,
    pub ov_w: f64,
    pub ov_c: f64,
    pub d: f64,
    pub d_w: f64,
    pub d_c: f64,
}

impl OverlapReport {
    pub fn distance(&self, metric: Metric) -> f64 {
        match metric {
            Metric::D => self.d,
            Metric::Dw => self.d_w,
            Metric::Dc => self.d_c,
        }
    }
}

/// Exact integer counts behind an [`OverlapReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapCounts {
    pub n: usize,
    pub p: usize,
    /// Points where every coordinate agrees.
    pub strong: usize,
    /// Sum over `i ≥ 2` of per-coordinate agreements.
    pub weak: usize,
    /// `Σ_{i≠j} agree(σ_i⁻¹σ'_i, σ_j⁻¹σ'_j)²`.
    pub corr_sq: u64,
}

impl OverlapCounts {
    pub fn report(&self) -> OverlapReport {
        let n = self.n as f64;
        let ov = self.strong as f64 / n;
        let ov_w = self.weak as f64 / ((self.p - 1) as f64 * n);
        let den = (self.p * (self.p - 1) * self.n * self.n) as u64;
        let ov_c = (self.corr_sq as f64 / den as f64).sqrt();
        let d_c = ((den - self.corr_sq) as f64 / den as f64).sqrt();
        OverlapReport {
            ov,
            ov_w,
            ov_c,
            d: (self.n - self.strong) as f64 / n,
            d_w: ((self.p - 1) * self.n - self.weak) as f64 / ((self.p - 1) as f64 * n),
            d_c,
        }
    }
}

/// Fraction of points where `a` and `b` agree.
pub fn overlap_pair(a: &Permutation, b: &Permutation) -> Result<f64> {
    Ok(a.agreements(b)? as f64 / a.len() as f64)
}

pub fn overlap_counts(a: &Alignment, b: &Alignment) -> Result<OverlapCounts> {
    a.same_shape(b)?;
    let (n, p) = (a.n(), a.p());
    let strong = (0..n)
        .filter(|&u| (1..p).all(|i| a.perm(i).apply(u) == b.perm(i).apply(u)))
        .count();
    let weak = (1..p)
        .map(|i| a.perm(i).agreements(b.perm(i)).expect("same shape"))
        .sum();
    let rel: Vec<Permutation> = (0..p)
        .map(|i| a.perm(i).inverse().compose_unchecked(b.perm(i)))
        .collect();
    let mut corr_sq = 0u64;
    for i in 0..p {
        for j in (i + 1)..p {
            let c = rel[i].agreements(&rel[j]).expect("same shape") as u64;
            corr_sq += 2 * c * c;
        }
    }
    Ok(OverlapCounts {
        n,
        p,
        strong,
        weak,
        corr_sq,
    })
}

pub fn overlap_multi(a: &Alignment, b: &Alignment) -> Result<OverlapReport> {
    Ok(overlap_counts(a, b)?.report())
}

pub fn distance(a: &Alignment, b: &Alignment, metric: Metric) -> Result<f64> {
    Ok(overlap_multi(a, b)?.distance(metric))
}

/// `σ_ij` as defined in the module docs; zero-based graph indices.
pub fn sigma_ij(sigma: &Alignment, truth: &Alignment, i: usize, j: usize) -> Permutation {
    truth
        .perm(j)
        .inverse()
        .compose_unchecked(sigma.perm(j))
        .compose_unchecked(&sigma.perm(i).inverse())
        .compose_unchecked(truth.perm(i))
}

fn pairwise<F>(sigma: &Alignment, truth: &Alignment, diag: usize, mut f: F) -> Result<Vec<Vec<usize>>>
where
    F: FnMut(&Permutation) -> usize,
{
    sigma.same_shape(truth)?;
    let p = sigma.p();
    let mut out = vec![vec![diag; p]; p];
    for i in 0..p {
        for j in (i + 1)..p {
            let v = f(&sigma_ij(sigma, truth, i, j));
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// `d_ij`: fixed points of `σ_ij`, diagonal `n`.
pub fn dij_matrix(sigma: &Alignment, truth: &Alignment) -> Result<Vec<Vec<usize>>> {
    pairwise(sigma, truth, sigma.n(), |s| s.fixed_points())
}

/// Edges `{u, v}` with `τ({u, v}) = {u, v}`, counted one by one.
pub fn fixed_edges(tau: &Permutation, index: &EdgeIndex) -> usize {
    (0..index.len())
        .filter(|&e| index.permute(tau, e) == e)
        .count()
}

/// `D_ij`: edges fixed by the edge action of `σ_ij`, diagonal `C(n, 2)`.
pub fn edge_fixed_points(sigma: &Alignment, truth: &Alignment) -> Result<Vec<Vec<usize>>> {
    let index = EdgeIndex::new(sigma.n());
    pairwise(sigma, truth, index.len(), |s| fixed_edges(s, &index))
}

/// `c_ij(a, b)`: agreements of `a_ij` and `b_ij`, diagonal `n`.
pub fn cij_matrix(a: &Alignment, b: &Alignment, truth: &Alignment) -> Result<Vec<Vec<usize>>> {
    a.same_shape(b)?;
    a.same_shape(truth)?;
    let p = a.p();
    let mut out = vec![vec![a.n(); p]; p];
    for i in 0..p {
        for j in (i + 1)..p {
            let v = sigma_ij(a, truth, i, j)
                .agreements(&sigma_ij(b, truth, i, j))
                .expect("same shape");
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}
