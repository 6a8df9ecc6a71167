//! Exact posterior of the Gaussian model.
//!
//! With `W^(i)_e = observed[i][σ_i(e)]`, the Hamiltonian is
//! `ℋ(σ) = −Σ_e Σ_{i≠j} W^(i)_e W^(j)_e` and the posterior is `∝ e^{−βℋ(σ)}`.

use crate::alignment::{Alignment, DEFAULT_ENUMERATION_CAP};
use crate::edge::EdgeIndex;
use crate::error::{Error, Result};
use crate::metrics::{sigma_ij, Metric};
use crate::models::{GaussianObservation, GaussianParams, GaussianSample};
use crate::posterior::PosteriorTable;

/// `β = ρ / (2(1−ρ)(1+(p−1)ρ))`, defined for `0 < ρ < 1`.
pub fn beta_of(rho: f64, p: usize) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::DegenerateTemperature(rho));
    }
    if p < 2 {
        return Err(Error::InvalidParams(format!("p = {p} < 2")));
    }
    Ok(rho / (2.0 * (1.0 - rho) * (1.0 + (p as f64 - 1.0) * rho)))
}

fn check_observed(observed: &[Vec<f64>], sigma: &Alignment) -> Result<EdgeIndex> {
    let index = EdgeIndex::new(sigma.n());
    if observed.len() != sigma.p() || observed.iter().any(|r| r.len() != index.len()) {
        return Err(Error::DimensionMismatch(format!(
            "observed must be {} x {} for n = {}",
            sigma.p(),
            index.len(),
            sigma.n()
        )));
    }
    Ok(index)
}

/// The re-aligned rows `W^(i)_e = observed[i][σ_i(e)]`.
pub(crate) fn aligned_weights(index: &EdgeIndex, observed: &[Vec<f64>], sigma: &Alignment) -> Vec<Vec<f64>> {
    observed
        .iter()
        .zip(sigma.perms())
        .map(|(row, s)| (0..index.len()).map(|e| row[index.permute(s, e)]).collect())
        .collect()
}

/// `−Σ_e Σ_{i≠j} W^(i)_e W^(j)_e` from aligned rows.
pub(crate) fn energy_of_rows(rows: &[Vec<f64>]) -> f64 {
    let m = rows[0].len();
    let mut h = 0.0;
    for e in 0..m {
        let mut sum = 0.0;
        let mut sq = 0.0;
        for row in rows {
            sum += row[e];
            sq += row[e] * row[e];
        }
        h -= sum * sum - sq;
    }
    h
}

pub(crate) fn hamiltonian_with(index: &EdgeIndex, observed: &[Vec<f64>], sigma: &Alignment) -> f64 {
    energy_of_rows(&aligned_weights(index, observed, sigma))
}

/// `ℋ(σ)` from the observation alone.
pub fn hamiltonian(observed: &[Vec<f64>], sigma: &Alignment) -> Result<f64> {
    let index = check_observed(observed, sigma)?;
    Ok(hamiltonian_with(&index, observed, sigma))
}

/// `−Σ_e Σ_{i≠j} G^(i)_e G^(j)_{σ_ij(e)}` from the latent weights and the truth.
pub fn latent_hamiltonian(sample: &GaussianSample, sigma: &Alignment) -> Result<f64> {
    sigma.same_shape(&sample.truth)?;
    let index = EdgeIndex::new(sigma.n());
    let g = &sample.weights;
    let mut h = 0.0;
    for i in 0..sigma.p() {
        for j in 0..sigma.p() {
            if i == j {
                continue;
            }
            let map = index.edge_map(&sigma_ij(sigma, &sample.truth, i, j));
            h -= (0..index.len()).map(|e| g[i][e] * g[j][map[e]]).sum::<f64>();
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEnergyReport {
    pub hamiltonian: f64,
    /// `ℋ(σ) − ℋ(π*)`.
    pub potential: f64,
    /// `−Σ_{i≠j} Σ_{e : σ_ij(e) ≠ e} G^(i)_e G^(j)_e`.
    pub v_diag: f64,
    /// `−Σ_{i≠j} Σ_{e : σ_ij(e) ≠ e} G^(i)_e G^(j)_{σ_ij(e)}`.
    pub v_off: f64,
    /// `None` when `ρ ∈ {0, 1}`.
    pub beta: Option<f64>,
}

/// Truth-relative decomposition `V = −V_diag + V_off`.
pub fn potential_split(sample: &GaussianSample, sigma: &Alignment) -> Result<GaussianEnergyReport> {
    sigma.same_shape(&sample.truth)?;
    let index = EdgeIndex::new(sigma.n());
    let g = &sample.weights;
    let (mut v_diag, mut v_off) = (0.0, 0.0);
    for i in 0..sigma.p() {
        for j in 0..sigma.p() {
            if i == j {
                continue;
            }
            let map = index.edge_map(&sigma_ij(sigma, &sample.truth, i, j));
            for (e, &f) in map.iter().enumerate() {
                if f != e {
                    v_diag -= g[i][e] * g[j][e];
                    v_off -= g[i][e] * g[j][f];
                }
            }
        }
    }
    let hamiltonian = hamiltonian_with(&index, &sample.observed, sigma);
    let at_truth = hamiltonian_with(&index, &sample.observed, &sample.truth);
    Ok(GaussianEnergyReport {
        hamiltonian,
        potential: hamiltonian - at_truth,
        v_diag,
        v_off,
        beta: beta_of(sample.params.rho, sample.params.p).ok(),
    })
}

/// Exhaustive table of `−βℋ(σ)`; with a truth, re-based to `−βV(σ)` so that
/// the truth has log-weight 0.
pub fn posterior_table(
    obs: &GaussianObservation,
    truth: Option<&Alignment>,
    cap: u64,
) -> Result<PosteriorTable> {
    let GaussianParams { n, p, rho } = obs.params;
    let beta = beta_of(rho, p)?;
    let index = EdgeIndex::new(n);
    let observed = &obs.observed;
    if let Some(t) = truth {
        check_observed(observed, t)?;
    }
    let table = PosteriorTable::build(n, p, cap, |sigma| {
        -beta * hamiltonian_with(&index, observed, sigma)
    })?;
    Ok(match truth {
        Some(t) => table.rebased(-beta * hamiltonian_with(&index, observed, t)),
        None => table,
    })
}

/// [`posterior_table`] with the default enumeration cap.
pub fn posterior_table_default(obs: &GaussianObservation, truth: Option<&Alignment>) -> Result<PosteriorTable> {
    posterior_table(obs, truth, DEFAULT_ENUMERATION_CAP)
}

/// `log Z_r(center)`: the weight of the closed ball of radius `r`.
pub fn restricted_partition(table: &PosteriorTable, center: &Alignment, r: f64, metric: Metric) -> Result<f64> {
    table.restricted_log_partition(center, r, metric)
}

/// `φ(α) = (1+η)α² − (1+2η)α` on `[0, 1]`.
pub fn annealed_rate(alpha: f64, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "[0, 1]",
        });
    }
    Ok((1.0 + eta) * alpha * alpha - (1.0 + 2.0 * eta) * alpha)
}

/// `max_{α∈[0,r]} φ(α)`. `φ` is convex with `φ(0) = 0`, so the maximum sits at an endpoint.
pub fn annealed_max(r: f64, eta: f64) -> Result<f64> {
    Ok(annealed_rate(r, eta)?.max(0.0))
}

/// Applies a common vertex relabelling: `out[i][τ(e)] = observed[i][e]`.
pub fn relabel_observed(observed: &[Vec<f64>], tau: &crate::perm::Permutation) -> Vec<Vec<f64>> {
    let index = EdgeIndex::new(tau.len());
    observed
        .iter()
        .map(|row| {
            let mut out = vec![0.0; row.len()];
            for (e, &w) in row.iter().enumerate() {
                out[index.permute(tau, e)] = w;
            }
            out
        })
        .collect()
}
