//! Declarative description of a phase-diagram sweep.

use std::path::{Path, PathBuf};

use malign_core::estimators::Schedule;
use malign_core::metrics::Metric;
use malign_core::{ErParams, GaussianParams};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Gaussian,
    Er,
}

/// Parameter grid. Threshold-relative variants are resolved against `n`, `p`
/// (and `s`) before the run, and the raw values are written to every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    Rho(Vec<f64>),
    RhoMultipleOfRho0(Vec<f64>),
    Er { s: f64, lambda: Vec<f64> },
    /// `λ` chosen so that `λs(1 − (1 − s)^{p−1})` equals each multiple.
    ErMultipleOfThreshold { s: f64, multiples: Vec<f64> },
}

impl Grid {
    fn len(&self) -> usize {
        match self {
            Grid::Rho(v) | Grid::RhoMultipleOfRho0(v) => v.len(),
            Grid::Er { lambda, .. } => lambda.len(),
            Grid::ErMultipleOfThreshold { multiples, .. } => multiples.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorConfig {
    Anneal {
        #[serde(default)]
        schedule: Schedule,
    },
    Greedy {
        #[serde(default)]
        schedule: Schedule,
    },
    ExhaustiveMap {
        #[serde(default = "default_cap")]
        cap: u64,
    },
    BallOptimal {
        r: f64,
        #[serde(default = "default_cap")]
        cap: u64,
    },
}

fn default_cap() -> u64 {
    malign_core::DEFAULT_ENUMERATION_CAP
}

fn default_metric() -> Metric {
    Metric::D
}

impl EstimatorConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorConfig::Anneal { .. } => "anneal",
            EstimatorConfig::Greedy { .. } => "greedy",
            EstimatorConfig::ExhaustiveMap { .. } => "exhaustive_map",
            EstimatorConfig::BallOptimal { .. } => "ball_optimal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub grid: Grid,
    pub trials: u64,
    pub estimator: EstimatorConfig,
    /// Distance reported in the `distance` column and used by `ball_optimal`.
    #[serde(default = "default_metric")]
    pub metric: Metric,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// One resolved grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: usize,
    /// Threshold multiple when the grid was given relative to a threshold.
    pub multiple: Option<f64>,
    pub params: PointParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PointParams {
    Gaussian(GaussianParams),
    Er(ErParams),
}

/// `ρ₀ = √(c_p ln n / n)` with `c_p = 8/p`.
pub fn threshold_rho0(n: usize, p: usize) -> Result<f64> {
    if n < 2 || p < 2 {
        return Err(HarnessError::Config(format!("rho0 needs n ≥ 2 and p ≥ 2, got n = {n}, p = {p}")));
    }
    let (n, p) = (n as f64, p as f64);
    Ok((8.0 / p * n.ln() / n).sqrt())
}

/// `λs(1 − (1 − s)^{p−1})`.
pub fn threshold_er(lambda: f64, s: f64, p: usize) -> Result<f64> {
    if !(lambda > 0.0) || !(s > 0.0 && s < 1.0) || p < 2 {
        return Err(HarnessError::Config(format!(
            "threshold needs λ > 0, 0 < s < 1, p ≥ 2; got λ = {lambda}, s = {s}, p = {p}"
        )));
    }
    Ok(lambda * s * (1.0 - (1.0 - s).powi(p as i32 - 1)))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() == 0 {
            return Err(HarnessError::Config("grid is empty".to_string()));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".to_string()));
        }
        let grid_model = match self.grid {
            Grid::Rho(_) | Grid::RhoMultipleOfRho0(_) => Model::Gaussian,
            Grid::Er { .. } | Grid::ErMultipleOfThreshold { .. } => Model::Er,
        };
        if grid_model != self.model {
            return Err(HarnessError::Config(format!(
                "grid kind does not match model {:?}",
                self.model
            )));
        }
        if let EstimatorConfig::BallOptimal { r, .. } = self.estimator {
            if !(0.0..=1.0).contains(&r) {
                return Err(HarnessError::Config(format!("ball radius {r} outside [0, 1]")));
            }
        }
        self.resolve().map(|_| ())
    }

    /// Raw model parameters for every grid point, validated.
    pub fn resolve(&self) -> Result<Vec<GridPoint>> {
        let (n, p) = (self.n, self.p);
        let gaussian = |index, multiple, rho| -> Result<GridPoint> {
            Ok(GridPoint {
                index,
                multiple,
                params: PointParams::Gaussian(GaussianParams::new(n, p, rho)?),
            })
        };
        let er = |index, multiple, lambda, s| -> Result<GridPoint> {
            Ok(GridPoint {
                index,
                multiple,
                params: PointParams::Er(ErParams::new(n, p, lambda, s)?),
            })
        };
        match &self.grid {
            Grid::Rho(rhos) => rhos.iter().enumerate().map(|(k, &r)| gaussian(k, None, r)).collect(),
            Grid::RhoMultipleOfRho0(ms) => {
                let rho0 = threshold_rho0(n, p)?;
                ms.iter()
                    .enumerate()
                    .map(|(k, &m)| gaussian(k, Some(m), m * rho0))
                    .collect()
            }
            Grid::Er { s, lambda } => lambda.iter().enumerate().map(|(k, &l)| er(k, None, l, *s)).collect(),
            Grid::ErMultipleOfThreshold { s, multiples } => {
                let unit = threshold_er(1.0, *s, p)?;
                multiples
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| er(k, Some(m), m / unit, *s))
                    .collect()
            }
        }
    }
}
