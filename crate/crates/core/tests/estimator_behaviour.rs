//! Seeded Monte-Carlo behaviour of the estimators.

use malign_core::estimators::{anneal_gaussian, map_exhaustive, score, Schedule};
use malign_core::gibbs_gaussian::{hamiltonian, posterior_table};
use malign_core::models::{sample_gaussian, GaussianParams};
use malign_core::{derive_seed, seeded_rng, Alignment};

fn map_hit_rate(rho: f64, trials: u64) -> f64 {
    let params = GaussianParams::new(5, 2, rho).unwrap();
    let hits = (0..trials)
        .filter(|&t| {
            let s = sample_gaussian(params, derive_seed(41, &[t])).unwrap();
            let table = posterior_table(&s.observation(), None, 1000).unwrap();
            map_exhaustive(&table).unwrap().estimate == s.truth
        })
        .count();
    hits as f64 / trials as f64
}

#[test]
fn map_recovers_truth_more_often_as_correlation_grows() {
    let rates: Vec<f64> = [0.2, 0.5, 0.8, 0.95].iter().map(|&r| map_hit_rate(r, 200)).collect();
    for w in rates.windows(2) {
        let slack = 2.0 * ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / 200.0).sqrt();
        assert!(w[1] >= w[0] - slack, "{rates:?}");
    }
    assert!(rates[3] > rates[0], "{rates:?}");
    assert!(rates[3] >= 0.8, "{rates:?}");
}

#[test]
fn annealing_recovers_noiseless_instances() {
    let params = GaussianParams::new(30, 2, 1.0).unwrap();
    let schedule = Schedule {
        t0: Some(30.0),
        moves: 1_000_000,
        gamma: 0.9995,
        ..Schedule::default()
    };
    let exact = (0..50)
        .filter(|&t| {
            let s = sample_gaussian(params, derive_seed(42, &[t])).unwrap();
            let out = anneal_gaussian(&s.observation(), &schedule, t).unwrap();
            score(&out.result.estimate, &s.truth).unwrap().ov == 1.0
        })
        .count();
    assert!(exact >= 48, "{exact} / 50 exact recoveries");
}

#[test]
fn default_temperature_needs_finite_beta() {
    let s = sample_gaussian(GaussianParams::new(6, 2, 1.0).unwrap(), 0).unwrap();
    assert!(anneal_gaussian(&s.observation(), &Schedule::default(), 0).is_err());
}

#[test]
fn infinite_temperature_is_a_random_walk() {
    let params = GaussianParams::new(20, 3, 0.5).unwrap();
    let schedule = Schedule {
        t0: Some(f64::INFINITY),
        moves: 20_000,
        ..Schedule::default()
    };
    let mut walk = Vec::new();
    let mut uniform = Vec::new();
    let mut rng = seeded_rng(43);
    for t in 0..50 {
        let s = sample_gaussian(params, derive_seed(43, &[t])).unwrap();
        let out = anneal_gaussian(&s.observation(), &schedule, t).unwrap();
        assert_eq!(out.accepted, schedule.moves);
        walk.push(out.final_energy);
        uniform.push(hamiltonian(&s.observed, &Alignment::random(20, 3, &mut rng)).unwrap());
    }
    let stats = |x: &[f64]| {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        (m, v / x.len() as f64)
    };
    let ((m1, v1), (m2, v2)) = (stats(&walk), stats(&uniform));
    let welch = (m1 - m2) / (v1 + v2).sqrt();
    assert!(welch.abs() < 4.0, "Welch t = {welch}");
}

#[test]
fn random_estimates_have_one_expected_fixed_point() {
    let mut rng = seeded_rng(44);
    let draws: Vec<f64> = (0..10_000)
        .map(|_| {
            let a = Alignment::random(100, 2, &mut rng);
            let b = Alignment::random(100, 2, &mut rng);
            100.0 * score(&a, &b).unwrap().ov
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    // Fixed points of a uniform permutation have mean and variance 1.
    assert!((mean - 1.0).abs() <= 4.0 / 100.0, "mean n·ov = {mean}");
}
