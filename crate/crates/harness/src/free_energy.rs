//! Exact `log Z` probes at tiny `n`, with truth-relative weights.

use std::io::Write;
use std::path::Path;

use malign_core::math::log_sum_exp;
use malign_core::{derive_seed, gibbs_gaussian, sample_gaussian, GaussianParams, DEFAULT_ENUMERATION_CAP};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::phase::{create_parent, sibling, write_json};
use crate::records::{float, SCHEMA_VERSION};

/// Floating-point allowance on `log Z ≥ 0` and on the Jensen gap.
pub const FREE_ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeEnergyConfig {
    pub n: usize,
    pub p: usize,
    pub rho: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergyTrial {
    pub grid_index: usize,
    pub rho: f64,
    pub trial: u64,
    pub seed: u64,
    pub log_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergyPoint {
    pub grid_index: usize,
    pub rho: f64,
    pub trials: u64,
    /// Sample mean of `log Z`.
    pub mean_log_z: f64,
    pub se_log_z: f64,
    /// `log` of the sample mean of `Z`.
    pub log_mean_z: f64,
    /// `log_mean_z − mean_log_z`.
    pub jensen_gap: f64,
    pub min_log_z: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergyRun {
    pub trials: Vec<FreeEnergyTrial>,
    pub points: Vec<FreeEnergyPoint>,
    /// Every trial has `log Z ≥ −tol` and every point a gap `≥ −tol`.
    pub ok: bool,
}

pub fn run_free_energy_probe(config: &FreeEnergyConfig) -> Result<FreeEnergyRun> {
    if config.rho.is_empty() || config.trials == 0 {
        return Err(HarnessError::Config("free-energy probe needs a nonempty grid and trials ≥ 1".to_string()));
    }
    let params: Vec<GaussianParams> = config
        .rho
        .iter()
        .map(|&r| GaussianParams::new(config.n, config.p, r))
        .collect::<malign_core::Result<_>>()?;
    malign_core::alignment::check_enumerable(config.n, config.p, config.cap)?;
    let jobs: Vec<(usize, u64)> = (0..params.len())
        .flat_map(|g| (0..config.trials).map(move |t| (g, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(g, t)| {
            let seed = derive_seed(config.seed, &[g as u64, t]);
            let sample = sample_gaussian(params[g], seed)?;
            let table = gibbs_gaussian::posterior_table(&sample.observation(), Some(&sample.truth), config.cap)?;
            Ok(FreeEnergyTrial {
                grid_index: g,
                rho: params[g].rho,
                trial: t,
                seed,
                log_z: table.log_partition(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<FreeEnergyPoint> = params
        .iter()
        .enumerate()
        .map(|(g, prm)| {
            let logs: Vec<f64> = trials.iter().filter(|t| t.grid_index == g).map(|t| t.log_z).collect();
            let k = logs.len() as f64;
            let mean_log_z = logs.iter().sum::<f64>() / k;
            let var = logs.iter().map(|x| (x - mean_log_z).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            let log_mean_z = log_sum_exp(&logs) - k.ln();
            let min_log_z = logs.iter().copied().fold(f64::INFINITY, f64::min);
            let jensen_gap = log_mean_z - mean_log_z;
            FreeEnergyPoint {
                grid_index: g,
                rho: prm.rho,
                trials: logs.len() as u64,
                mean_log_z,
                se_log_z: (var / k).sqrt(),
                log_mean_z,
                jensen_gap,
                min_log_z,
                ok: min_log_z >= -FREE_ENERGY_TOL && jensen_gap >= -FREE_ENERGY_TOL,
            }
        })
        .collect();
    let ok = points.iter().all(|p| p.ok);
    Ok(FreeEnergyRun { trials, points, ok })
}

pub fn write_free_energy_csv<W: Write>(out: W, run: &FreeEnergyRun) -> Result<()> {
    let mut out = out;
    writeln!(out, "# schema_version={SCHEMA_VERSION}").map_err(|e| HarnessError::io("<free-energy csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["grid_index", "rho", "trial", "seed", "log_z"])?;
    for t in &run.trials {
        w.write_record([
            t.grid_index.to_string(),
            float(t.rho),
            t.trial.to_string(),
            t.seed.to_string(),
            float(t.log_z),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io("<free-energy csv>", e))?;
    Ok(())
}

/// Writes the per-trial CSV to `out` and the per-point summary next to it.
pub fn write_free_energy_outputs(out: &Path, run: &FreeEnergyRun) -> Result<()> {
    create_parent(out)?;
    let file = std::fs::File::create(out).map_err(|e| HarnessError::io(out, e))?;
    write_free_energy_csv(std::io::BufWriter::new(file), run)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        schema_version: u32,
        ok: bool,
        points: &'a [FreeEnergyPoint],
    }
    write_json(
        &sibling(out, "summary.json"),
        &Summary {
            schema_version: SCHEMA_VERSION,
            ok: run.ok,
            points: &run.points,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(rho: Vec<f64>, trials: u64) -> FreeEnergyConfig {
        FreeEnergyConfig {
            n: 4,
            p: 2,
            rho,
            trials,
            seed: 3,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    #[test]
    fn log_z_nonnegative_and_gap() {
        let run = run_free_energy_probe(&config(vec![0.2, 0.8], 20)).unwrap();
        assert!(run.ok);
        assert_eq!(run.trials.len(), 40);
        for t in &run.trials {
            // The truth alone contributes weight 1.
            assert!(t.log_z >= 0.0);
        }
        for p in &run.points {
            assert!(p.jensen_gap >= -FREE_ENERGY_TOL);
        }
    }

    #[test]
    fn single_trial_has_zero_gap() {
        let run = run_free_energy_probe(&config(vec![0.5], 1)).unwrap();
        assert!(run.points[0].jensen_gap.abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let mut c = config(vec![0.5], 1);
        c.n = 7;
        c.cap = 1000;
        assert!(run_free_energy_probe(&c).is_err());
        assert!(run_free_energy_probe(&config(vec![], 1)).is_err());
    }
}
