//! Direct Bayes computation for the ER model at tiny `n`.
//!
//! For each hypothesis `π`, the latent children are `π_i(𝒢^(i))` as sets, and
//! the likelihood is the product over all edges of the probability of the
//! pattern of children containing that edge. No type counts are involved.

use serde::Serialize;

use crate::alignment::{enumerate_alignments, Alignment};
use crate::edge::{EdgeIndex, EdgeSet};
use crate::error::{Error, Result};
use crate::gibbs_er;
use crate::math::log_sum_exp;
use crate::models::ErObservation;

/// Normalized posterior over every alignment, in enumeration order.
pub fn bayes_oracle_posterior(obs: &ErObservation, cap: u64) -> Result<Vec<(Alignment, f64)>> {
    let params = obs.params;
    let index = EdgeIndex::new(params.n);
    let mut hypotheses = Vec::new();
    let mut log_likelihoods = Vec::new();
    for pi in enumerate_alignments(params.n, params.p, cap)? {
        let children: Vec<EdgeSet> = obs
            .observed
            .iter()
            .zip(pi.perms())
            .map(|(g, q)| g.image(&index, q))
            .collect();
        let mut ll = 0.0;
        for e in 0..index.len() {
            let pattern = children
                .iter()
                .enumerate()
                .filter(|(_, c)| c.contains(e))
                .fold(0u32, |m, (i, _)| m | 1 << i);
            ll += params.pattern_probability(pattern).ln();
        }
        hypotheses.push(pi);
        log_likelihoods.push(ll);
    }
    let z = log_sum_exp(&log_likelihoods);
    Ok(hypotheses
        .into_iter()
        .zip(log_likelihoods)
        .map(|(pi, ll)| (pi, (ll - z).exp()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BayesOracleCheck {
    pub states: usize,
    pub max_abs_error: f64,
    pub ok: bool,
}

/// Largest probability gap between the type-count posterior and the direct one.
pub fn check_bayes_oracle(obs: &ErObservation, cap: u64, tol: f64) -> Result<BayesOracleCheck> {
    let direct = bayes_oracle_posterior(obs, cap)?;
    let table = gibbs_er::posterior_table(obs, cap)?;
    if table.len() != direct.len() {
        return Err(Error::DimensionMismatch("table sizes differ".to_string()));
    }
    let mut max_abs_error: f64 = 0.0;
    for (pi, q) in &direct {
        let k = table
            .position(pi)
            .ok_or_else(|| Error::InvalidAlignment(format!("{pi} missing from the table")))?;
        max_abs_error = max_abs_error.max((table.probability(k) - q).abs());
    }
    Ok(BayesOracleCheck {
        states: direct.len(),
        max_abs_error,
        ok: max_abs_error <= tol,
    })
}
