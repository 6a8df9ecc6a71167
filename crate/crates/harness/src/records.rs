//! Trial rows, their CSV encoding, and per-point summaries.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::Model;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

pub const TRIAL_COLUMNS: [&str; 19] = [
    "grid_index",
    "model",
    "n",
    "p",
    "multiple",
    "rho",
    "lambda",
    "s",
    "trial",
    "seed",
    "estimator",
    "status",
    "ov",
    "ov_w",
    "ov_c",
    "distance",
    "exact_hit",
    "energy_estimate",
    "energy_truth",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub grid_index: usize,
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub multiple: Option<f64>,
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    pub s: Option<f64>,
    pub trial: u64,
    pub seed: u64,
    pub estimator: String,
    /// `ok`, or the error that stopped the trial.
    pub status: String,
    pub ov: Option<f64>,
    pub ov_w: Option<f64>,
    pub ov_c: Option<f64>,
    pub distance: Option<f64>,
    pub exact_hit: Option<bool>,
    pub energy_estimate: Option<f64>,
    pub energy_truth: Option<f64>,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn fields(&self) -> Vec<String> {
        let model = match self.model {
            Model::Gaussian => "gaussian",
            Model::Er => "er",
        };
        vec![
            self.grid_index.to_string(),
            model.to_string(),
            self.n.to_string(),
            self.p.to_string(),
            opt_float(self.multiple),
            opt_float(self.rho),
            opt_float(self.lambda),
            opt_float(self.s),
            self.trial.to_string(),
            self.seed.to_string(),
            self.estimator.clone(),
            self.status.clone(),
            opt_float(self.ov),
            opt_float(self.ov_w),
            opt_float(self.ov_c),
            opt_float(self.distance),
            self.exact_hit.map(|b| b.to_string()).unwrap_or_default(),
            opt_float(self.energy_estimate),
            opt_float(self.energy_truth),
        ]
    }
}

/// 17 significant digits, enough for an exact round trip.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// `# schema_version=1` line, header, then one row per record.
pub fn write_trials<W: Write>(mut out: W, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "# schema_version={SCHEMA_VERSION}").map_err(|e| crate::error::HarnessError::io("<trial csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_COLUMNS)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|e| crate::error::HarnessError::io("<trial csv>", e))?;
    Ok(())
}

pub fn read_trials<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let rows = r.deserialize().collect::<std::result::Result<Vec<TrialRecord>, _>>()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub grid_index: usize,
    pub multiple: Option<f64>,
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    pub s: Option<f64>,
    pub trials: u64,
    pub failed: u64,
    pub mean_ov: f64,
    /// Standard error of `mean_ov`.
    pub se_ov: f64,
    pub hit_rate: f64,
    /// Binomial standard error `√(h(1−h)/k)`.
    pub se_hit: f64,
    pub mean_ov_w: f64,
    pub mean_ov_c: f64,
    pub mean_distance: f64,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// One summary per grid index, in grid order; failed trials are counted but
/// excluded from the means.
pub fn summarize(records: &[TrialRecord]) -> Vec<PointSummary> {
    let mut indices: Vec<usize> = records.iter().map(|r| r.grid_index).collect();
    indices.sort_unstable();
    indices.dedup();
    indices
        .into_iter()
        .map(|g| {
            let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.grid_index == g).collect();
            let ok: Vec<&TrialRecord> = rows.iter().copied().filter(|r| r.is_ok()).collect();
            let col = |f: fn(&TrialRecord) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let (mean_ov, se_ov) = mean_se(&col(|r| r.ov));
            let hits = ok.iter().filter(|r| r.exact_hit == Some(true)).count() as f64;
            let k = ok.len() as f64;
            let hit_rate = if ok.is_empty() { f64::NAN } else { hits / k };
            let first = rows[0];
            PointSummary {
                grid_index: g,
                multiple: first.multiple,
                rho: first.rho,
                lambda: first.lambda,
                s: first.s,
                trials: rows.len() as u64,
                failed: (rows.len() - ok.len()) as u64,
                mean_ov,
                se_ov,
                hit_rate,
                se_hit: (hit_rate * (1.0 - hit_rate) / k).sqrt(),
                mean_ov_w: mean_se(&col(|r| r.ov_w)).0,
                mean_ov_c: mean_se(&col(|r| r.ov_c)).0,
                mean_distance: mean_se(&col(|r| r.distance)).0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    /// Grid indices `k` with `mean[k+1] < mean[k] − slack·√(se_k² + se_{k+1}²)`.
    pub violations: Vec<usize>,
    /// `mean_ov(last) − mean_ov(first)`.
    pub rise: f64,
    pub ok: bool,
}

/// Nondecreasing mean overlap between consecutive grid points, up to
/// `slack` combined standard errors.
pub fn overlap_trend(summaries: &[PointSummary], slack: f64) -> TrendCheck {
    let violations: Vec<usize> = summaries
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let tol = slack * (w[0].se_ov.powi(2) + w[1].se_ov.powi(2)).sqrt();
            // NaN means fail.
            !(w[1].mean_ov >= w[0].mean_ov - tol)
        })
        .map(|(k, _)| k)
        .collect();
    let rise = match (summaries.first(), summaries.last()) {
        (Some(a), Some(b)) => b.mean_ov - a.mean_ov,
        _ => f64::NAN,
    };
    TrendCheck {
        ok: violations.is_empty(),
        violations,
        rise,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(g: usize, t: u64, ov: f64, hit: bool) -> TrialRecord {
        TrialRecord {
            grid_index: g,
            model: Model::Gaussian,
            n: 5,
            p: 2,
            multiple: Some(0.5),
            rho: Some(0.3),
            lambda: None,
            s: None,
            trial: t,
            seed: 11,
            estimator: "anneal".to_string(),
            status: "ok".to_string(),
            ov: Some(ov),
            ov_w: Some(ov),
            ov_c: Some(ov),
            distance: Some(1.0 - ov),
            exact_hit: Some(hit),
            energy_estimate: Some(-1.0),
            energy_truth: Some(-2.0),
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_trials(&mut buf, &[record(0, 0, 0.2, false)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "# schema_version=1");
        assert!(lines[1].starts_with("grid_index,model,n,p,"));
        assert!(lines[2].contains("2.0000000000000001e-1"));
        assert!(lines[2].contains(",,"));
    }

    #[test]
    fn summaries_and_trend() {
        let mut rows = vec![record(0, 0, 0.0, false), record(0, 1, 0.2, false)];
        rows.extend([record(1, 0, 1.0, true), record(1, 1, 0.8, false)]);
        let mut failed = record(1, 2, 0.0, false);
        failed.status = "error: boom".to_string();
        failed.ov = None;
        rows.push(failed);
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert!((s[0].mean_ov - 0.1).abs() < 1e-15);
        assert_eq!((s[1].trials, s[1].failed), (3, 1));
        assert!((s[1].hit_rate - 0.5).abs() < 1e-15);
        assert!((s[1].se_hit - (0.25f64 / 2.0).sqrt()).abs() < 1e-15);
        let t = overlap_trend(&s, 2.0);
        assert!(t.ok);
        assert!((t.rise - 0.8).abs() < 1e-15);
        let down = overlap_trend(&[s[1].clone(), s[0].clone()], 2.0);
        assert_eq!(down.violations, vec![0]);
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            ov in 0.0f64..=1.0,
            energy in -1e6f64..1e6,
            seed in any::<u64>(),
            hit in any::<bool>(),
            rho in proptest::option::of(0.0f64..1.0),
        ) {
            let mut r = record(3, 9, ov, hit);
            r.seed = seed;
            r.energy_estimate = Some(energy);
            r.rho = rho;
            let mut failed = r.clone();
            failed.status = "error: \"quoted\", with comma".to_string();
            failed.ov = None;
            failed.exact_hit = None;
            let rows = vec![r, failed];
            let mut buf = Vec::new();
            write_trials(&mut buf, &rows).unwrap();
            prop_assert_eq!(read_trials(buf.as_slice()).unwrap(), rows);
        }
    }
}
