//! Samplers for the correlated Gaussian and Erdős–Rényi `p`-graph models.
//!
//! A sample keeps the latent graphs and the hidden alignment next to the
//! scrambled observation. Inference code only ever receives the observation
//! half ([`GaussianObservation`] / [`ErObservation`]).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::alignment::Alignment;
use crate::edge::{EdgeIndex, EdgeSet};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
}

impl GaussianParams {
    pub fn new(n: usize, p: usize, rho: f64) -> Result<Self> {
        let params = GaussianParams { n, p, rho };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n = {} < 2", self.n)));
        }
        if self.p < 2 {
            return Err(Error::InvalidParams(format!("p = {} < 2", self.p)));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParams(format!(
                "rho = {} outside [0, 1]",
                self.rho
            )));
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    pub s: f64,
}

impl ErParams {
    pub fn new(n: usize, p: usize, lambda: f64, s: f64) -> Result<Self> {
        let params = ErParams { n, p, lambda, s };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n = {} < 2", self.n)));
        }
        if self.p < 2 {
            return Err(Error::InvalidParams(format!("p = {} < 2", self.p)));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParams(format!(
                "s = {} outside (0, 1)",
                self.s
            )));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda = {} must be positive",
                self.lambda
            )));
        }
        if self.edge_probability() > 1.0 {
            return Err(Error::InvalidParams(format!(
                "lambda / n = {} exceeds 1",
                self.edge_probability()
            )));
        }
        Ok(())
    }

    /// Master-graph edge probability `λ / n`.
    pub fn edge_probability(&self) -> f64 {
        self.lambda / self.n as f64
    }

    /// Probability that an edge shows the child pattern `X` (as a bitmask over
    /// the `p` graphs): `(λ/n) s^|X| (1−s)^(p−|X|)` for `X ≠ ∅`, and
    /// `1 − (λ/n)(1 − (1−s)^p)` for the empty pattern.
    pub fn pattern_probability(&self, mask: u32) -> f64 {
        let q = self.edge_probability();
        let k = mask.count_ones() as i32;
        if k == 0 {
            1.0 - q * (1.0 - (1.0 - self.s).powi(self.p as i32))
        } else {
            q * self.s.powi(k) * (1.0 - self.s).powi(self.p as i32 - k)
        }
    }

    pub fn edge_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

/// What the statistician sees in the Gaussian model.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianObservation {
    pub params: GaussianParams,
    /// `observed[i][e]`, `p × C(n, 2)`.
    pub observed: Vec<Vec<f64>>,
}

impl GaussianObservation {
    pub fn new(params: GaussianParams, observed: Vec<Vec<f64>>) -> Result<Self> {
        params.validate()?;
        check_matrix(&observed, params.p, params.edge_count(), "observed")?;
        Ok(GaussianObservation { params, observed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSample {
    pub params: GaussianParams,
    /// Latent weights `G_e^(i)`.
    pub weights: Vec<Vec<f64>>,
    pub truth: Alignment,
    /// `observed[i][e] = weights[i][(π_i*)⁻¹(e)]`.
    pub observed: Vec<Vec<f64>>,
}

impl GaussianSample {
    /// Rebuilds a sample from its latent half, scrambling per the truth.
    pub fn from_parts(
        params: GaussianParams,
        weights: Vec<Vec<f64>>,
        truth: Alignment,
    ) -> Result<Self> {
        params.validate()?;
        let m = params.edge_count();
        check_matrix(&weights, params.p, m, "weights")?;
        if truth.n() != params.n || truth.p() != params.p {
            return Err(Error::DimensionMismatch("truth vs params".to_string()));
        }
        let index = EdgeIndex::new(params.n);
        let observed = (0..params.p)
            .map(|i| {
                let inv = truth.perm(i).inverse();
                (0..m).map(|e| weights[i][index.permute(&inv, e)]).collect()
            })
            .collect();
        Ok(GaussianSample {
            params,
            weights,
            truth,
            observed,
        })
    }

    pub fn observation(&self) -> GaussianObservation {
        GaussianObservation {
            params: self.params,
            observed: self.observed.clone(),
        }
    }
}

/// Draws the truth (`p − 1` Fisher–Yates shuffles), then per edge one shared
/// normal `Z⁰` and `p` private normals, `G^(i) = √ρ Z⁰ + √(1−ρ) Z^(i)`.
pub fn sample_gaussian(params: GaussianParams, seed: u64) -> Result<GaussianSample> {
    params.validate()?;
    let mut rng = seeded_rng(seed);
    let truth = Alignment::random(params.n, params.p, &mut rng);
    let m = params.edge_count();
    let (a, b) = (params.rho.sqrt(), (1.0 - params.rho).sqrt());
    let mut weights = vec![vec![0.0; m]; params.p];
    for e in 0..m {
        let shared: f64 = rng.sample(StandardNormal);
        for row in weights.iter_mut() {
            let own: f64 = rng.sample(StandardNormal);
            row[e] = a * shared + b * own;
        }
    }
    GaussianSample::from_parts(params, weights, truth)
}

/// What the statistician sees in the Erdős–Rényi model.
#[derive(Debug, Clone, PartialEq)]
pub struct ErObservation {
    pub params: ErParams,
    pub observed: Vec<EdgeSet>,
}

impl ErObservation {
    pub fn new(params: ErParams, observed: Vec<EdgeSet>) -> Result<Self> {
        params.validate()?;
        check_sets(&observed, params.p, params.edge_count(), "observed")?;
        Ok(ErObservation { params, observed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErSample {
    pub params: ErParams,
    pub master: EdgeSet,
    pub children: Vec<EdgeSet>,
    pub truth: Alignment,
    /// `e ∈ observed[i] ⟺ π_i*(e) ∈ children[i]`.
    pub observed: Vec<EdgeSet>,
}

impl ErSample {
    pub fn from_parts(
        params: ErParams,
        master: EdgeSet,
        children: Vec<EdgeSet>,
        truth: Alignment,
    ) -> Result<Self> {
        params.validate()?;
        let m = params.edge_count();
        if master.capacity() != m {
            return Err(Error::DimensionMismatch("master edge set".to_string()));
        }
        check_sets(&children, params.p, m, "children")?;
        if truth.n() != params.n || truth.p() != params.p {
            return Err(Error::DimensionMismatch("truth vs params".to_string()));
        }
        if children.iter().any(|c| !c.is_subset(&master)) {
            return Err(Error::InvalidParams(
                "every child must be a subgraph of the master graph".to_string(),
            ));
        }
        let index = EdgeIndex::new(params.n);
        let observed = children
            .iter()
            .zip(truth.perms())
            .map(|(child, pi)| child.image(&index, &pi.inverse()))
            .collect();
        Ok(ErSample {
            params,
            master,
            children,
            truth,
            observed,
        })
    }

    pub fn observation(&self) -> ErObservation {
        ErObservation {
            params: self.params,
            observed: self.observed.clone(),
        }
    }
}

/// Truth first, then per edge: master coin with probability `λ/n`, and for a
/// master edge `p` independent child coins with probability `s`.
pub fn sample_er(params: ErParams, seed: u64) -> Result<ErSample> {
    params.validate()?;
    let mut rng = seeded_rng(seed);
    let truth = Alignment::random(params.n, params.p, &mut rng);
    let m = params.edge_count();
    let q = params.edge_probability();
    let mut master = EdgeSet::empty(m);
    let mut children = vec![EdgeSet::empty(m); params.p];
    for e in 0..m {
        if rng.random_bool(q) {
            master.insert(e);
            for child in children.iter_mut() {
                if rng.random_bool(params.s) {
                    child.insert(e);
                }
            }
        }
    }
    ErSample::from_parts(params, master, children, truth)
}

/// `𝒢^(1) ∩ ⋃_{i≥2} π_i(𝒢^(i))` for the alignment `aligned_by`.
pub fn intersection_union_graph(observed: &[EdgeSet], aligned_by: &Alignment) -> Result<EdgeSet> {
    let m = aligned_by.n() * (aligned_by.n() - 1) / 2;
    check_sets(observed, aligned_by.p(), m, "observed")?;
    let index = EdgeIndex::new(aligned_by.n());
    let mut union = EdgeSet::empty(m);
    for (set, pi) in observed.iter().zip(aligned_by.perms()).skip(1) {
        union = union.union(&set.image(&index, pi));
    }
    Ok(observed[0].intersection(&union))
}

fn check_matrix(rows: &[Vec<f64>], p: usize, m: usize, what: &str) -> Result<()> {
    if rows.len() != p || rows.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected {p} rows of {m} edge weights"
        )));
    }
    Ok(())
}

fn check_sets(sets: &[EdgeSet], p: usize, m: usize, what: &str) -> Result<()> {
    if sets.len() != p || sets.iter().any(|s| s.capacity() != m) {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected {p} edge sets over {m} edges"
        )));
    }
    Ok(())
}
