//! Gaussian quadratic forms `Q = Xᵀ M X`, `X ~ N(0, Σ)`: closed-form log-MGF,
//! its trace series, a Monte-Carlo cross-check, and the tail utilities.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

const SYMMETRY_TOL: f64 = 1e-12;

/// Largest spectral radius of `2tΣM` accepted by [`mc_check`].
pub const MC_RADIUS_GUARD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct QformSpec {
    sigma: DMatrix<f64>,
    m: DMatrix<f64>,
    chol: DMatrix<f64>,
    /// `Lᵀ M L` with `Σ = L Lᵀ`; shares its spectrum with `ΣM`.
    b: DMatrix<f64>,
}

fn check_symmetric(a: &DMatrix<f64>, name: &str) -> Result<()> {
    let scale = a.amax().max(1.0);
    if (a - a.transpose()).amax() > SYMMETRY_TOL * scale {
        return Err(Error::InvalidParams(format!("{name} is not symmetric")));
    }
    Ok(())
}

impl QformSpec {
    pub fn new(sigma: DMatrix<f64>, m: DMatrix<f64>) -> Result<Self> {
        let n = sigma.nrows();
        if n == 0 || !sigma.is_square() || m.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "sigma is {:?}, m is {:?}",
                sigma.shape(),
                m.shape()
            )));
        }
        check_symmetric(&sigma, "sigma")?;
        check_symmetric(&m, "m")?;
        let chol = Cholesky::new(sigma.clone())
            .ok_or_else(|| Error::InvalidParams("sigma is not positive definite".to_string()))?
            .unpack();
        let mut b = chol.transpose() * &m * &chol;
        b = (&b + b.transpose()) * 0.5;
        Ok(QformSpec { sigma, m, chol, b })
    }

    /// `Σ = A Aᵀ / N + I/10` and `M = (B + Bᵀ)/2`, with standard normal `A`, `B`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let a = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let sigma = &a * a.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.1;
        let raw = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let m = (&raw + raw.transpose()) * 0.5;
        Self::new(sigma, m)
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Eigenvalues of `ΣM`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.b.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Spectral radius of `ΣM`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |r, l| r.max(l.abs()))
    }

    /// The `t > 0` at which `2tΣM` has spectral radius `radius`.
    pub fn t_for_radius(&self, radius: f64) -> Result<f64> {
        let r = self.spectral_radius();
        if r == 0.0 || !(radius > 0.0) {
            return Err(Error::Domain("M vanishes or the radius is not positive".to_string()));
        }
        Ok(radius / (2.0 * r))
    }

    /// `E[Q] = Tr(ΣM)`.
    pub fn mean(&self) -> f64 {
        self.b.trace()
    }

    /// `Tr((ΣM)²)`.
    pub fn trace2(&self) -> f64 {
        self.b.norm_squared()
    }

    /// `‖Σ^½ M Σ^½‖_op`.
    pub fn opnorm(&self) -> f64 {
        self.spectral_radius()
    }

    /// One draw of `Q`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut DVector<f64>, x: &mut DVector<f64>) -> f64 {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        x.gemv(1.0, &self.chol, z, 0.0);
        x.dot(&(&self.m * &*x))
    }
}

/// `−½ log det(I − 2tΣM)` via a Cholesky factor of `I − 2t Lᵀ M L`.
pub fn log_mgf(spec: &QformSpec, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("t = {t}")));
    }
    let n = spec.dim();
    let a = DMatrix::<f64>::identity(n, n) - &spec.b * (2.0 * t);
    let chol = Cholesky::new(a)
        .ok_or_else(|| Error::Domain(format!("I − 2tΣM is not positive definite at t = {t}")))?;
    Ok(-chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Magnitude of the first omitted term.
    pub next_term: f64,
}

/// `Σ_{k=1}^{terms} 2^(k−1) Tr((ΣM)^k) t^k / k`.
pub fn log_mgf_series(spec: &QformSpec, t: f64, terms: usize) -> SeriesValue {
    let term = |power: &DMatrix<f64>, k: usize| 2f64.powi(k as i32 - 1) * power.trace() * t.powi(k as i32) / k as f64;
    let mut power = spec.b.clone();
    let mut value = 0.0;
    for k in 1..=terms {
        value += term(&power, k);
        power = &power * &spec.b;
    }
    SeriesValue {
        value,
        next_term: term(&power, terms + 1).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McCheck {
    pub analytic: f64,
    pub mc_estimate: f64,
    pub stderr: f64,
    pub ok: bool,
}

/// Monte-Carlo `log E[e^{tQ}]` as a shifted log-mean-exp, with the delta-method
/// standard error `sd / (mean · √samples)` of the shifted exponentials.
pub fn mc_check(spec: &QformSpec, t: f64, samples: usize, seed: u64) -> Result<McCheck> {
    if samples < 2 {
        return Err(Error::InvalidParams(format!("samples = {samples} < 2")));
    }
    let radius = 2.0 * t.abs() * spec.spectral_radius();
    if radius > MC_RADIUS_GUARD {
        return Err(Error::Domain(format!(
            "spectral radius of 2tΣM is {radius}, above {MC_RADIUS_GUARD}"
        )));
    }
    let analytic = log_mgf(spec, t)?;
    if t == 0.0 {
        return Ok(McCheck {
            analytic,
            mc_estimate: 0.0,
            stderr: 0.0,
            ok: true,
        });
    }
    let mut rng = seeded_rng(seed);
    let n = spec.dim();
    let (mut z, mut x) = (DVector::zeros(n), DVector::zeros(n));
    let y: Vec<f64> = (0..samples).map(|_| t * spec.sample(&mut rng, &mut z, &mut x)).collect();
    let shift = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = y.iter().map(|v| (v - shift).exp()).collect();
    let count = samples as f64;
    let mean = w.iter().sum::<f64>() / count;
    let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let mc_estimate = shift + mean.ln();
    let stderr = var.sqrt() / (mean * count.sqrt());
    Ok(McCheck {
        analytic,
        mc_estimate,
        stderr,
        ok: (analytic - mc_estimate).abs() <= 3.0 * stderr,
    })
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "(0, ∞)",
        })
    }
}

/// `exp(−c² / (4(trace2 + c·opnorm)))`, an upper bound on `ℙ(Q − E[Q] > c)`.
pub fn gaussian_tail_bound(trace2: f64, opnorm: f64, c: f64) -> Result<f64> {
    positive("trace2", trace2)?;
    positive("opnorm", opnorm)?;
    positive("c", c)?;
    Ok((-c * c / (4.0 * (trace2 + c * opnorm))).exp())
}

/// `√T / (√π c) · exp(−c² / (4T))` with `T = trace2`.
pub fn sharp_tail(trace2: f64, c: f64) -> Result<f64> {
    positive("trace2", trace2)?;
    positive("c", c)?;
    Ok(trace2.sqrt() / (std::f64::consts::PI.sqrt() * c) * (-c * c / (4.0 * trace2)).exp())
}

/// Empirical `ℙ(Q − E[Q] > c)` for each threshold, from one shared batch.
pub fn empirical_tail(spec: &QformSpec, thresholds: &[f64], samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    let n = spec.dim();
    let (mut z, mut x) = (DVector::zeros(n), DVector::zeros(n));
    let mean = spec.mean();
    let mut hits = vec![0usize; thresholds.len()];
    for _ in 0..samples {
        let dev = spec.sample(&mut rng, &mut z, &mut x) - mean;
        for (h, &c) in hits.iter_mut().zip(thresholds) {
            if dev > c {
                *h += 1;
            }
        }
    }
    hits.into_iter().map(|h| h as f64 / samples as f64).collect()
}
