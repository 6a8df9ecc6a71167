//! Monte-Carlo checks of the samplers and the Gaussian energy decomposition
//! against closed-form moments.

use malign_core::gibbs_gaussian::{beta_of, potential_split};
use malign_core::math::choose2;
use malign_core::metrics::{dij_matrix, edge_fixed_points};
use malign_core::models::{intersection_union_graph, sample_er, sample_gaussian, ErParams, GaussianParams};
use malign_core::oracles::qform::{empirical_tail, gaussian_tail_bound, QformSpec};
use malign_core::{seeded_rng, Alignment, Permutation};
use nalgebra::DMatrix;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn gaussian_latent_covariance() {
    let params = GaussianParams::new(101, 3, 0.6).unwrap();
    let mut sums = [[0.0f64; 3]; 3];
    let mut count = 0usize;
    for seed in 0..199 {
        let s = sample_gaussian(params, seed).unwrap();
        for e in 0..params.edge_count() {
            for i in 0..3 {
                for j in 0..3 {
                    sums[i][j] += s.weights[i][e] * s.weights[j][e];
                }
            }
        }
        count += params.edge_count();
    }
    assert!(count >= 1_000_000);
    for (i, row) in sums.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.6 };
            let got = v / count as f64;
            assert!((got - expected).abs() < 0.01, "cov[{i}][{j}] = {got}");
        }
    }
}

#[test]
fn er_master_size() {
    let params = ErParams::new(100, 2, 3.0, 0.5).unwrap();
    let sizes: Vec<f64> = (0..10_000)
        .map(|seed| sample_er(params, seed).unwrap().master.len() as f64)
        .collect();
    let (mean, _) = mean_and_se(&sizes);
    let q = 0.03;
    let sd = (4950.0 * q * (1.0 - q) / 10_000.0f64).sqrt();
    assert!((mean - 148.5).abs() <= 4.0 * sd, "mean master size {mean}");
}

#[test]
fn er_pattern_frequencies() {
    let params = ErParams::new(100, 3, 3.0, 0.5).unwrap();
    let mut counts = [0u64; 8];
    let mut edges = 0u64;
    let mut seed = 0;
    while edges < 1_000_000 {
        let s = sample_er(params, seed).unwrap();
        for e in 0..params.edge_count() {
            let mask = (0..3).filter(|&i| s.children[i].contains(e)).fold(0usize, |m, i| m | 1 << i);
            counts[mask] += 1;
        }
        edges += params.edge_count() as u64;
        seed += 1;
    }
    let q = 3.0 / 100.0;
    for (mask, &c) in counts.iter().enumerate() {
        let k = (mask as u32).count_ones() as i32;
        let prob = if mask == 0 {
            1.0 - q * (1.0 - 0.5f64.powi(3))
        } else {
            q * 0.5f64.powi(k) * 0.5f64.powi(3 - k)
        };
        assert!((prob - params.pattern_probability(mask as u32)).abs() < 1e-15);
        let expected = edges as f64 * prob;
        let sd = (edges as f64 * prob * (1.0 - prob)).sqrt();
        assert!((c as f64 - expected).abs() <= 4.0 * sd, "mask {mask}: {c} vs {expected}");
    }
}

#[test]
fn intersection_graph_density_at_truth() {
    let params = ErParams::new(100, 3, 3.0, 0.5).unwrap();
    let sizes: Vec<f64> = (0..10_000)
        .map(|seed| {
            let s = sample_er(params, seed).unwrap();
            intersection_union_graph(&s.observed, &s.truth).unwrap().len() as f64
        })
        .collect();
    let (mean, _) = mean_and_se(&sizes);
    // λs(1 − (1 − s)^{p−1}) = 1.125.
    let q = 1.125 / 100.0;
    let sd = (4950.0 * q * (1.0 - q) / 10_000.0f64).sqrt();
    assert!((mean - 4950.0 * q).abs() <= 4.0 * sd, "mean {mean} vs {}", 4950.0 * q);
}

/// `σ_i = π*_i ∘ τ_i`, so that `σ_ij = τ_j τ_i⁻¹` whatever the truth.
fn relative_to_truth(truth: &Alignment, taus: &[Permutation]) -> Alignment {
    Alignment::new(
        truth
            .perms()
            .iter()
            .zip(taus)
            .map(|(pi, tau)| pi.compose(tau).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn diagonal_potential_mean() {
    let (n, p, rho) = (20, 3, 0.5);
    let params = GaussianParams::new(n, p, rho).unwrap();
    let mut rng = seeded_rng(77);
    let mut taus = vec![Permutation::identity(n)];
    taus.extend((1..p).map(|_| Permutation::random(n, &mut rng)));
    let first = sample_gaussian(params, 0).unwrap();
    let big_d = edge_fixed_points(&relative_to_truth(&first.truth, &taus), &first.truth).unwrap();
    let mut off_diagonal_edges = 0usize;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                off_diagonal_edges += choose2(n) - big_d[i][j];
            }
        }
    }
    let expected = -rho * off_diagonal_edges as f64;
    let draws: Vec<f64> = (0..10_000)
        .map(|seed| {
            let s = sample_gaussian(params, seed).unwrap();
            potential_split(&s, &relative_to_truth(&s.truth, &taus)).unwrap().v_diag
        })
        .collect();
    let (mean, se) = mean_and_se(&draws);
    assert!((mean - expected).abs() <= 4.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn off_diagonal_exponential_moment_envelope() {
    let (n, p, rho) = (15, 2, 0.3);
    let params = GaussianParams::new(n, p, rho).unwrap();
    let beta = beta_of(rho, p).unwrap();
    let mut rng = seeded_rng(78);
    let taus = vec![Permutation::identity(n), Permutation::random(n, &mut rng)];
    let first = sample_gaussian(params, 0).unwrap();
    let d = dij_matrix(&relative_to_truth(&first.truth, &taus), &first.truth).unwrap();
    let mut reference = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                reference += beta * beta * (choose2(n) - choose2(d[i][j])) as f64;
            }
        }
    }
    let exponents: Vec<f64> = (0..100_000)
        .map(|seed| {
            let s = sample_gaussian(params, 1_000_000 + seed).unwrap();
            -beta * potential_split(&s, &relative_to_truth(&s.truth, &taus)).unwrap().v_off
        })
        .collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = exponents.iter().map(|x| (x - shift).exp()).collect();
    let (mean, se) = mean_and_se(&w);
    let log_mc = shift + mean.ln();
    let log_se = se / mean;
    assert!(
        (log_mc - reference).abs() <= 3.0 * log_se + n as f64,
        "log MC {log_mc} (se {log_se}) vs {reference}"
    );
}

#[test]
fn chi_square_tail_below_bound() {
    let spec = QformSpec::new(DMatrix::identity(50, 50), DMatrix::identity(50, 50)).unwrap();
    let cs = [5.0, 10.0, 20.0];
    let tails = empirical_tail(&spec, &cs, 1_000_000, 9);
    for (&c, &tail) in cs.iter().zip(&tails) {
        let bound = gaussian_tail_bound(spec.trace2(), spec.opnorm(), c).unwrap();
        assert!(tail <= bound, "c = {c}: {tail} > {bound}");
    }
}
