//! Verification sweeps over the oracles. Each sweep yields rows
//! `(check, instance, lhs, rhs, ok)`; only gating rows decide the exit status.

use std::io::Write;
use std::path::Path;

use malign_core::alignment::all_permutations;
use malign_core::graph::Graph;
use malign_core::gibbs_er::check_automorphism_monotonicity;
use malign_core::math::choose2;
use malign_core::models::intersection_union_graph;
use malign_core::oracles::automorphism::{component_preserving_automorphism_bound, component_preserving_count_global};
use malign_core::oracles::bayes::check_bayes_oracle;
use malign_core::oracles::counting::{check_permcount_cached, check_usable_cached, symmetric_thresholds, DijCache};
use malign_core::oracles::qform::{mc_check, QformSpec};
use malign_core::oracles::spanning::{
    check_spanning_bound, exhaustive_max_spanning_tree, max_spanning_tree_weight, WeightedCompleteGraph, SPANNING_TOL,
};
use malign_core::oracles::trace::{edge_fixed_point_bounds, trace_identity_check};
use malign_core::{derive_seed, sample_er, seeded_rng, Alignment, ErParams, EdgeIndex, DEFAULT_ENUMERATION_CAP};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::records::{float, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    Usable,
    Permcount,
    Spanning,
    Automorphism,
    Qform,
    Trace,
    BayesOracle,
    Monotonicity,
}

/// Budget and shape of a sweep. Fields a suite does not use are ignored;
/// `None` picks the suite's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub p_max: Option<usize>,
    /// Random instances, or a cap on the exhaustive sweep.
    pub instances: Option<u64>,
    pub cross_check: Option<u64>,
    pub repetitions: Option<u64>,
    pub samples: Option<usize>,
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    pub lambda: Option<f64>,
    pub s: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub instance: String,
    pub lhs: String,
    pub rhs: String,
    pub ok: bool,
    /// Diagnostic rows are persisted but never fail the run.
    #[serde(skip)]
    pub gating: bool,
}

impl VerifyRow {
    fn new(check: &str, instance: String, lhs: String, rhs: String, ok: bool) -> Self {
        VerifyRow {
            check: check.to_string(),
            instance,
            lhs,
            rhs,
            ok,
            gating: true,
        }
    }

    fn diagnostic(mut self) -> Self {
        self.gating = false;
        self
    }

    fn error(check: &str, instance: String, e: impl std::fmt::Display) -> Self {
        VerifyRow::new(check, instance, format!("error: {e}"), String::new(), false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn gating_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.gating && !r.ok).count()
    }

    pub fn passed(&self) -> bool {
        self.gating_failures() == 0
    }

    /// Rows of one check.
    pub fn rows_of<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a VerifyRow> + 'a {
        self.rows.iter().filter(move |r| r.check == check)
    }
}

pub fn run_verify(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rows = match suite {
        Suite::Usable => usable(opts)?,
        Suite::Permcount => permcount(opts)?,
        Suite::Spanning => spanning(opts)?,
        Suite::Automorphism => automorphism(opts)?,
        Suite::Qform => qform(opts)?,
        Suite::Trace => trace(opts)?,
        Suite::BayesOracle => bayes_oracle(opts)?,
        Suite::Monotonicity => monotonicity(opts)?,
    };
    if rows.is_empty() {
        rows.push(
            VerifyRow::new("warning", "0 instances".to_string(), String::new(), String::new(), true).diagnostic(),
        );
    }
    Ok(VerifyReport { suite, rows })
}

fn limit(opts: &VerifyOptions, default: u64) -> u64 {
    opts.instances.unwrap_or(default)
}

fn describe_d(d: &[Vec<usize>]) -> String {
    let p = d.len();
    let mut parts = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            parts.push(format!("d{}{}={}", i + 1, j + 1, d[i][j]));
        }
    }
    parts.join(" ")
}

fn counting_setup(opts: &VerifyOptions) -> Result<(usize, usize, DijCache, Vec<Vec<Vec<usize>>>)> {
    let n = opts.n.unwrap_or(4);
    let p = opts.p.unwrap_or(3);
    if p < 2 {
        return Err(HarnessError::Config(format!("p = {p} < 2")));
    }
    let truth = Alignment::random(n, p, &mut seeded_rng(opts.seed));
    let cache = DijCache::new(n, p, &truth, DEFAULT_ENUMERATION_CAP)?;
    let mut all = symmetric_thresholds(p, n);
    all.truncate(limit(opts, u64::MAX).min(all.len() as u64) as usize);
    Ok((n, p, cache, all))
}

/// Every symmetric threshold matrix with entries in `0..=n`.
fn usable(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let (n, p, cache, all) = counting_setup(opts)?;
    Ok(all
        .par_iter()
        .map(|d| {
            let instance = format!("n={n} p={p} {}", describe_d(d));
            match check_usable_cached(&cache, d) {
                Ok(c) => VerifyRow::new("usable", instance, c.count.to_string(), float(c.bound), c.ok),
                Err(e) => VerifyRow::error("usable", instance, e),
            }
        })
        .collect())
}

/// Every threshold matrix against every insertion order `τ ∈ S_p`, plus the
/// averaging step once per matrix.
fn permcount(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let (n, p, cache, all) = counting_setup(opts)?;
    let taus = all_permutations(p);
    Ok(all
        .par_iter()
        .flat_map_iter(|d| {
            let mut rows = Vec::with_capacity(taus.len() + 1);
            for tau in &taus {
                let instance = format!("n={n} p={p} {} tau={tau}", describe_d(d));
                rows.push(match check_permcount_cached(&cache, d, tau) {
                    Ok(c) => VerifyRow::new("permcount", instance, c.check.count.to_string(), float(c.check.bound), c.check.ok),
                    Err(e) => VerifyRow::error("permcount", instance, e),
                });
            }
            if let Some(tau) = taus.first() {
                let instance = format!("n={n} p={p} {}", describe_d(d));
                rows.push(match check_permcount_cached(&cache, d, tau) {
                    Ok(c) => VerifyRow::new(
                        "permcount.averaging",
                        instance,
                        float(c.averaging_lhs),
                        float(c.averaging_rhs),
                        c.averaging_ok,
                    ),
                    Err(e) => VerifyRow::error("permcount.averaging", instance, e),
                });
            }
            rows
        })
        .collect())
}

fn spanning_row(check: &str, instance: String, g: &WeightedCompleteGraph) -> VerifyRow {
    match check_spanning_bound(g) {
        Ok(c) => VerifyRow::new(check, instance, float(c.lhs), float(c.rhs), c.ok),
        Err(e) => VerifyRow::error(check, instance, e),
    }
}

/// Random weights at `p = 3..=p_max`, the equality corners, and Prim against
/// exhaustive enumeration at `p = 5`.
fn spanning(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let p_max = opts.p_max.unwrap_or(6);
    let instances = limit(opts, 100_000);
    let cross = opts.cross_check.unwrap_or(1000);
    let mut rows = Vec::new();
    for p in 3..=p_max {
        let batch: Vec<VerifyRow> = (0..instances)
            .into_par_iter()
            .map(|k| {
                let g = WeightedCompleteGraph::random(p, &mut seeded_rng(derive_seed(opts.seed, &[p as u64, k])));
                spanning_row("spanning", format!("p={p} k={k}"), &g)
            })
            .collect();
        rows.extend(batch);
    }
    if instances > 0 {
        for p in 2..=p_max.max(2) {
            for w in [0.0, 1.0] {
                let g = WeightedCompleteGraph::constant(p, w)?;
                rows.push(spanning_row("spanning.corner", format!("p={p} constant={w}"), &g));
            }
        }
        for x in [0.25, 0.5, 0.75] {
            let g = WeightedCompleteGraph::constant(2, x)?;
            rows.push(spanning_row("spanning.corner", format!("p=2 x={x}"), &g));
        }
    }
    let prim: Vec<VerifyRow> = (0..cross)
        .into_par_iter()
        .map(|k| {
            let g = WeightedCompleteGraph::random(5, &mut seeded_rng(derive_seed(opts.seed, &[u64::MAX, k])));
            let a = max_spanning_tree_weight(&g).weight;
            let b = exhaustive_max_spanning_tree(&g);
            VerifyRow::new("spanning.prim_vs_exhaustive", format!("p=5 k={k}"), float(a), float(b), (a - b).abs() <= SPANNING_TOL)
        })
        .collect();
    rows.extend(prim);
    Ok(rows)
}

/// Every graph on `1..=max` vertices (`max = n`, default 6). The stated
/// degree-factorial bound gates; the bound with a factor 2 per single-edge
/// component is a diagnostic.
fn automorphism(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let max = opts.n.unwrap_or(6);
    if max > 7 {
        return Err(HarnessError::Config(format!("automorphism sweep supports at most 7 vertices, got {max}")));
    }
    let mut budget = limit(opts, u64::MAX);
    let mut rows = Vec::new();
    for k in 1..=max {
        let masks = (1u64 << choose2(k)).min(budget);
        budget -= masks;
        let batch: Vec<VerifyRow> = (0..masks)
            .into_par_iter()
            .flat_map_iter(|mask| {
                let g = Graph::from_mask(k, mask);
                let instance = format!("n={k} mask={mask}");
                match (component_preserving_automorphism_bound(&g), component_preserving_count_global(&g)) {
                    (Ok(c), Ok(global)) => vec![
                        VerifyRow::new("automorphism.degree_factorial", instance.clone(), c.count.to_string(), c.bound.to_string(), c.ok),
                        VerifyRow::new(
                            "automorphism.count_cross_check",
                            instance.clone(),
                            c.count.to_string(),
                            global.to_string(),
                            c.count == global,
                        ),
                        VerifyRow::new(
                            "automorphism.edge_flip_bound",
                            instance,
                            c.count.to_string(),
                            c.bound_with_edge_flips.to_string(),
                            c.count <= c.bound_with_edge_flips,
                        )
                        .diagnostic(),
                    ],
                    (Err(e), _) | (_, Err(e)) => vec![VerifyRow::error("automorphism.degree_factorial", instance, e)],
                }
            })
            .collect();
        rows.extend(batch);
    }
    Ok(rows)
}

/// Monte-Carlo log-MGF against the determinant formula. Single repetitions
/// are diagnostics; the coverage row gates.
fn qform(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let reps = opts.repetitions.or(opts.instances).unwrap_or(40);
    let dim = opts.dim.unwrap_or(10);
    let samples = opts.samples.unwrap_or(1_000_000);
    let radius = opts.radius.unwrap_or(0.2);
    let mut rows: Vec<VerifyRow> = (0..reps)
        .into_par_iter()
        .map(|k| {
            let instance = format!("dim={dim} radius={radius} samples={samples} rep={k}");
            let mut rng = seeded_rng(derive_seed(opts.seed, &[k, 0]));
            let check = QformSpec::random(dim, &mut rng).and_then(|spec| {
                let t = spec.t_for_radius(radius)?;
                mc_check(&spec, t, samples, derive_seed(opts.seed, &[k, 1]))
            });
            match check {
                Ok(c) => VerifyRow::new("qform.mc", instance, float(c.analytic), float(c.mc_estimate), c.ok).diagnostic(),
                Err(e) => VerifyRow::error("qform.mc", instance, e),
            }
        })
        .collect();
    if reps > 0 {
        let hits = rows.iter().filter(|r| r.ok).count();
        let coverage = hits as f64 / reps as f64;
        rows.push(VerifyRow::new(
            "qform.coverage",
            format!("{hits}/{reps} within 3 standard errors"),
            float(coverage),
            float(0.95),
            coverage >= 0.95,
        ));
    }
    Ok(rows)
}

/// `Tr(M_σ²)` identity on random alignments at `(n, p)`, and the edge
/// fixed-point bounds over all of `S_4`.
fn trace(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let n = opts.n.unwrap_or(6);
    let p = opts.p.unwrap_or(3);
    let instances = limit(opts, 100);
    let mut rows: Vec<VerifyRow> = (0..instances)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_rng(derive_seed(opts.seed, &[k]));
            let sigma = Alignment::random(n, p, &mut rng);
            let truth = Alignment::random(n, p, &mut rng);
            let instance = format!("n={n} p={p} sigma={sigma} truth={truth}");
            match trace_identity_check(&sigma, &truth, None) {
                Ok(c) => VerifyRow::new("trace.identity", instance, c.lhs.to_string(), c.rhs.to_string(), c.ok),
                Err(e) => VerifyRow::error("trace.identity", instance, e),
            }
        })
        .collect();
    if instances > 0 {
        for tau in all_permutations(4) {
            let c = edge_fixed_point_bounds(&tau);
            let instance = format!("tau={tau} d={} D={}", c.d, c.big_d);
            rows.push(VerifyRow::new("trace.edge_fixed_lower", instance.clone(), "0".to_string(), c.excess.to_string(), c.excess >= 0));
            rows.push(VerifyRow::new(
                "trace.edge_fixed_upper",
                instance,
                c.excess.to_string(),
                float(c.upper),
                c.excess as f64 <= c.upper,
            ));
        }
    }
    Ok(rows)
}

pub const BAYES_TOL: f64 = 1e-9;

fn er_params(opts: &VerifyOptions, n: usize, p: usize, lambda: f64, s: f64) -> Result<ErParams> {
    Ok(ErParams::new(
        opts.n.unwrap_or(n),
        opts.p.unwrap_or(p),
        opts.lambda.unwrap_or(lambda),
        opts.s.unwrap_or(s),
    )?)
}

/// Type-count posterior against the per-edge Bayes computation.
fn bayes_oracle(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let params = er_params(opts, 4, 2, 2.0, 0.5)?;
    Ok((0..limit(opts, 50))
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(opts.seed, &[k]);
            let instance = format!("n={} p={} lambda={} s={} seed={seed}", params.n, params.p, params.lambda, params.s);
            let check = sample_er(params, seed)
                .and_then(|sample| check_bayes_oracle(&sample.observation(), DEFAULT_ENUMERATION_CAP, BAYES_TOL));
            match check {
                Ok(c) => VerifyRow::new("bayes_oracle", instance, float(c.max_abs_error), float(BAYES_TOL), c.ok),
                Err(e) => VerifyRow::error("bayes_oracle", instance, e),
            }
        })
        .collect())
}

/// For sampled `π`, every automorphism of `𝒢^(1) ∩ ⋃_{i≥2} π_i(𝒢^(i))`
/// must not increase the number of present edges.
fn monotonicity(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let params = er_params(opts, 6, 2, 3.0, 0.7)?;
    if params.n > 8 {
        return Err(HarnessError::Config(format!("monotonicity sweep supports n ≤ 8, got {}", params.n)));
    }
    let index = EdgeIndex::new(params.n);
    Ok((0..limit(opts, 100))
        .into_par_iter()
        .flat_map_iter(|k| {
            let seed = derive_seed(opts.seed, &[k]);
            let run = || -> malign_core::Result<Vec<VerifyRow>> {
                let sample = sample_er(params, seed)?;
                let pi = Alignment::random(params.n, params.p, &mut seeded_rng(derive_seed(seed, &[1])));
                let h = intersection_union_graph(&sample.observed, &pi)?;
                let graph = Graph::from_edge_set(&index, &h);
                graph
                    .automorphisms_brute_force()
                    .iter()
                    .map(|sigma| {
                        let r = check_automorphism_monotonicity(&sample.observed, &pi, sigma)?;
                        Ok(VerifyRow::new(
                            "monotonicity",
                            format!("seed={seed} pi={pi} sigma={sigma}"),
                            float(r.after),
                            float(r.before),
                            r.ok,
                        ))
                    })
                    .collect()
            };
            run().unwrap_or_else(|e| vec![VerifyRow::error("monotonicity", format!("seed={seed}"), e)])
        })
        .collect())
}

pub fn write_verify_csv<W: Write>(mut out: W, report: &VerifyReport) -> Result<()> {
    writeln!(out, "# schema_version={SCHEMA_VERSION}").map_err(|e| HarnessError::io("<verify csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "instance", "lhs", "rhs", "ok"])?;
    for r in &report.rows {
        w.write_record([r.check.as_str(), &r.instance, &r.lhs, &r.rhs, if r.ok { "true" } else { "false" }])?;
    }
    w.flush().map_err(|e| HarnessError::io("<verify csv>", e))?;
    Ok(())
}

pub fn write_verify_outputs(out: &Path, report: &VerifyReport) -> Result<()> {
    crate::phase::create_parent(out)?;
    let file = std::fs::File::create(out).map_err(|e| HarnessError::io(out, e))?;
    write_verify_csv(std::io::BufWriter::new(file), report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> VerifyOptions {
        VerifyOptions {
            seed: 9,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn zero_instances_warns() {
        let report = run_verify(
            Suite::BayesOracle,
            &VerifyOptions {
                instances: Some(0),
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].instance, "0 instances");
        assert!(report.passed());
    }

    #[test]
    fn usable_small_sweep() {
        let report = run_verify(
            Suite::Usable,
            &VerifyOptions {
                n: Some(3),
                p: Some(2),
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.passed());
        // d = 0 imposes nothing: all 3! alignments count.
        assert_eq!(report.rows[0].lhs, "6");
    }

    #[test]
    fn automorphism_counterexample_is_reported() {
        let report = run_verify(
            Suite::Automorphism,
            &VerifyOptions {
                n: Some(2),
                ..opts()
            },
        )
        .unwrap();
        // K2: two automorphisms against a bound of 1; the diagnostic holds.
        let bad: Vec<_> = report.rows.iter().filter(|r| !r.ok).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].instance, "n=2 mask=1");
        assert_eq!((bad[0].lhs.as_str(), bad[0].rhs.as_str()), ("2", "1"));
        assert!(!report.passed());
    }

    #[test]
    fn diagnostics_do_not_gate() {
        let report = run_verify(
            Suite::Qform,
            &VerifyOptions {
                repetitions: Some(4),
                samples: Some(20_000),
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(report.rows.len(), 5);
        assert_eq!(report.rows.iter().filter(|r| r.gating).count(), 1);
    }

    #[test]
    fn csv_has_five_columns() {
        let report = run_verify(
            Suite::Trace,
            &VerifyOptions {
                instances: Some(2),
                ..opts()
            },
        )
        .unwrap();
        assert!(report.passed());
        let mut buf = Vec::new();
        write_verify_csv(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema_version=1"));
        assert_eq!(lines.next(), Some("check,instance,lhs,rhs,ok"));
        assert_eq!(lines.count(), report.rows.len());
    }
}
