//! Estimators: exhaustive MAP, the ball-optimal estimator, and simulated
//! annealing / greedy search for moderate `n`.
//!
//! Nothing here takes a truth argument; scoring goes through [`score`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::Alignment;
use crate::edge::EdgeIndex;
use crate::error::{Error, Result};
use crate::gibbs_er::{edge_masks, type_energies};
use crate::gibbs_gaussian::{aligned_weights, beta_of, energy_of_rows};
use crate::metrics::{overlap_multi, Metric, OverlapReport};
use crate::models::{ErObservation, GaussianObservation};
use crate::posterior::{check_radius, PosteriorTable, BALL_EPS};
use crate::rng::{derive_seed, seeded_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExhaustiveMap,
    BallOptimal,
    Anneal,
    Greedy,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ExhaustiveMap => "exhaustive_map",
            Method::BallOptimal => "ball_optimal",
            Method::Anneal => "anneal",
            Method::Greedy => "greedy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub estimate: Alignment,
    /// Log-probability (exhaustive MAP), ball mass (ball-optimal), or the
    /// negated energy `−ℋ` of the estimate (search methods).
    pub score: f64,
    pub method: Method,
    /// Table size for table methods, proposed moves for search methods.
    pub iterations: u64,
    pub seed: u64,
    /// Entries sharing the optimal score (1 when the optimum is unique).
    pub ties: u64,
}

/// Highest log-weight; ties go to the first entry in enumeration order.
pub fn map_exhaustive(table: &PosteriorTable) -> Result<EstimatorResult> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let w = table.log_weights();
    let mut best = 0;
    for k in 1..w.len() {
        if w[k] > w[best] {
            best = k;
        }
    }
    let ties = w.iter().filter(|&&x| x == w[best]).count() as u64;
    Ok(EstimatorResult {
        estimate: table.alignments()[best].clone(),
        score: w[best] - table.log_partition(),
        method: Method::ExhaustiveMap,
        iterations: table.len() as u64,
        seed: 0,
        ties,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub r: f64,
    pub metric: Metric,
    /// `max_x ℙ_post(B(x, r))`.
    pub c_n: f64,
    pub argmax_center: Alignment,
    pub ties: u64,
}

/// Posterior mass of every closed ball `B(x, r)`, maximised over centres.
pub fn concentration(table: &PosteriorTable, r: f64, metric: Metric) -> Result<ConcentrationReport> {
    check_radius(r)?;
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let probs = table.probabilities();
    let all = table.alignments();
    let masses: Vec<f64> = all
        .par_iter()
        .map(|x| {
            all.iter()
                .zip(&probs)
                .filter(|(y, _)| overlap_multi(x, y).expect("same shape").distance(metric) <= r + BALL_EPS)
                .map(|(_, &q)| q)
                .sum()
        })
        .collect();
    let mut best = 0;
    for k in 1..masses.len() {
        if masses[k] > masses[best] {
            best = k;
        }
    }
    let ties = masses.iter().filter(|&&m| m == masses[best]).count() as u64;
    Ok(ConcentrationReport {
        r,
        metric,
        c_n: masses[best],
        argmax_center: all[best].clone(),
        ties,
    })
}

/// The centre of the heaviest ball, i.e. the Bayes estimator for the loss
/// `1{d(π̂, π*) > r}`.
pub fn ball_optimal(table: &PosteriorTable, r: f64, metric: Metric) -> Result<EstimatorResult> {
    let c = concentration(table, r, metric)?;
    Ok(EstimatorResult {
        estimate: c.argmax_center,
        score: c.c_n,
        method: Method::BallOptimal,
        iterations: table.len() as u64,
        seed: 0,
        ties: c.ties,
    })
}

pub fn score(estimate: &Alignment, truth: &Alignment) -> Result<OverlapReport> {
    overlap_multi(estimate, truth)
}

/// Where each annealing run starts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// A fresh uniform alignment per restart.
    #[default]
    Random,
    /// Vertices of graph `i` matched to those of graph 1 by the rank of their
    /// (weighted) degree; shared by all restarts.
    DegreeRank,
}

/// Geometric cooling `T_k = T₀ γ^k`, with `k` advanced every
/// `moves_per_temperature` proposals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    /// Initial temperature on the energy scale; `None` means `2/β` of the model.
    pub t0: Option<f64>,
    pub gamma: f64,
    pub moves: u64,
    pub moves_per_temperature: u64,
    /// Independent runs from fresh random starts; the best one is returned.
    pub restarts: u32,
    /// Probability of a synchronised move (same transposition in every
    /// coordinate `i ≥ 2`) when `p ≥ 3`.
    pub sync_probability: f64,
    /// Recompute the energy from scratch every this many moves and record the drift.
    pub check_every: Option<u64>,
    pub max_n: usize,
    pub start: Start,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            t0: None,
            gamma: 0.999,
            moves: 500_000,
            moves_per_temperature: 100,
            restarts: 1,
            sync_probability: 0.1,
            check_every: None,
            max_n: 200,
            start: Start::Random,
        }
    }
}

impl Schedule {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "gamma = {} must lie in (0, 1) for a decreasing temperature",
                self.gamma
            )));
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0) {
                return Err(Error::InvalidSchedule(format!("t0 = {t0} must be positive")));
            }
        }
        if self.moves_per_temperature == 0 {
            return Err(Error::InvalidSchedule("moves_per_temperature = 0".to_string()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidSchedule("restarts = 0".to_string()));
        }
        if !(0.0..=1.0).contains(&self.sync_probability) {
            return Err(Error::InvalidSchedule(format!(
                "sync_probability = {} outside [0, 1]",
                self.sync_probability
            )));
        }
        Ok(())
    }
}

/// Outcome of a search run, with the bookkeeping needed by tests.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub result: EstimatorResult,
    pub best_energy: f64,
    pub final_energy: f64,
    pub accepted: u64,
    /// Largest `|incremental − recomputed|` seen at the consistency checks.
    pub max_drift: Option<f64>,
}

/// Energy with O(n) transposition deltas.
trait SearchState: Clone {
    fn energy(&self) -> f64;
    fn recompute(&self) -> f64;
    /// Energy change of swapping `u, v` in coordinate `coord`, or in every
    /// coordinate `≥ 1` when `coord` is `None`.
    fn delta(&self, coord: Option<usize>, u: usize, v: usize) -> f64;
    fn apply(&mut self, coord: Option<usize>, u: usize, v: usize, delta: f64);
    fn alignment(&self) -> &Alignment;
}

#[derive(Clone)]
struct GaussianState<'a> {
    index: &'a EdgeIndex,
    observed: &'a [Vec<f64>],
    sigma: Alignment,
    rows: Vec<Vec<f64>>,
    sums: Vec<f64>,
    energy: f64,
}

impl<'a> GaussianState<'a> {
    fn new(index: &'a EdgeIndex, observed: &'a [Vec<f64>], sigma: Alignment) -> Self {
        let rows = aligned_weights(index, observed, &sigma);
        let sums = (0..index.len()).map(|e| rows.iter().map(|r| r[e]).sum()).collect();
        let energy = energy_of_rows(&rows);
        GaussianState {
            index,
            observed,
            sigma,
            rows,
            sums,
            energy,
        }
    }

    fn coords(&self, coord: Option<usize>) -> std::ops::Range<usize> {
        match coord {
            Some(i) => i..i + 1,
            None => 1..self.rows.len(),
        }
    }
}

impl SearchState for GaussianState<'_> {
    fn energy(&self) -> f64 {
        self.energy
    }

    fn recompute(&self) -> f64 {
        energy_of_rows(&aligned_weights(self.index, self.observed, &self.sigma))
    }

    // σ_i ← σ_i ∘ (u v) swaps W_i on the edges {u,w} and {v,w}.
    fn delta(&self, coord: Option<usize>, u: usize, v: usize) -> f64 {
        let mut d = 0.0;
        for w in 0..self.index.n() {
            if w == u || w == v {
                continue;
            }
            let (a, b) = (self.index.index(u, w), self.index.index(v, w));
            let shift: f64 = self.coords(coord).map(|i| self.rows[i][b] - self.rows[i][a]).sum();
            d -= 2.0 * shift * (self.sums[a] - self.sums[b]) + 2.0 * shift * shift;
        }
        d
    }

    fn apply(&mut self, coord: Option<usize>, u: usize, v: usize, delta: f64) {
        for w in 0..self.index.n() {
            if w == u || w == v {
                continue;
            }
            let (a, b) = (self.index.index(u, w), self.index.index(v, w));
            for i in self.coords(coord) {
                let shift = self.rows[i][b] - self.rows[i][a];
                self.rows[i].swap(a, b);
                self.sums[a] += shift;
                self.sums[b] -= shift;
            }
        }
        for i in self.coords(coord) {
            self.sigma.perm_mut(i).swap_images(u, v);
        }
        self.energy += delta;
    }

    fn alignment(&self) -> &Alignment {
        &self.sigma
    }
}

#[derive(Clone)]
struct ErState<'a> {
    index: &'a EdgeIndex,
    observed: &'a [crate::edge::EdgeSet],
    energies: &'a [f64],
    pi: Alignment,
    masks: Vec<u32>,
    energy: f64,
}

impl<'a> ErState<'a> {
    fn new(
        index: &'a EdgeIndex,
        observed: &'a [crate::edge::EdgeSet],
        energies: &'a [f64],
        pi: Alignment,
    ) -> Self {
        let masks = edge_masks(index, observed, &pi);
        let energy = masks.iter().map(|&m| energies[m as usize]).sum();
        ErState {
            index,
            observed,
            energies,
            pi,
            masks,
            energy,
        }
    }

    fn move_bits(&self, coord: Option<usize>) -> u32 {
        match coord {
            Some(i) => 1 << i,
            None => ((1u32 << self.pi.p()) - 1) & !1,
        }
    }
}

impl SearchState for ErState<'_> {
    fn energy(&self) -> f64 {
        self.energy
    }

    fn recompute(&self) -> f64 {
        edge_masks(self.index, self.observed, &self.pi)
            .iter()
            .map(|&m| self.energies[m as usize])
            .sum()
    }

    // π_i ← (u v) ∘ π_i moves graph i's bit between the edges {u,w} and {v,w}.
    fn delta(&self, coord: Option<usize>, u: usize, v: usize) -> f64 {
        let bits = self.move_bits(coord);
        let mut d = 0.0;
        for w in 0..self.index.n() {
            if w == u || w == v {
                continue;
            }
            let (a, b) = (self.index.index(u, w), self.index.index(v, w));
            let (ma, mb) = (self.masks[a], self.masks[b]);
            let na = (ma & !bits) | (mb & bits);
            let nb = (mb & !bits) | (ma & bits);
            d += self.energies[na as usize] + self.energies[nb as usize]
                - self.energies[ma as usize]
                - self.energies[mb as usize];
        }
        d
    }

    fn apply(&mut self, coord: Option<usize>, u: usize, v: usize, delta: f64) {
        let bits = self.move_bits(coord);
        for w in 0..self.index.n() {
            if w == u || w == v {
                continue;
            }
            let (a, b) = (self.index.index(u, w), self.index.index(v, w));
            let (ma, mb) = (self.masks[a], self.masks[b]);
            self.masks[a] = (ma & !bits) | (mb & bits);
            self.masks[b] = (mb & !bits) | (ma & bits);
        }
        let transposition = crate::perm::Permutation::transposition(self.pi.n(), u, v);
        let range = match coord {
            Some(i) => i..i + 1,
            None => 1..self.pi.p(),
        };
        for i in range {
            let updated = transposition.compose_unchecked(self.pi.perm(i));
            *self.pi.perm_mut(i) = updated;
        }
        self.energy += delta;
    }

    fn alignment(&self) -> &Alignment {
        &self.pi
    }
}

/// One annealing run from `state`; `t0 = 0` gives a greedy descent.
fn run_search<S: SearchState>(mut state: S, schedule: &Schedule, t0: f64, rng: &mut impl Rng) -> SearchOutcomeParts {
    let n = state.alignment().n();
    let p = state.alignment().p();
    let mut best = state.alignment().clone();
    let mut best_energy = state.energy();
    let mut temperature = t0;
    let mut accepted = 0u64;
    let mut max_drift: Option<f64> = None;
    for step in 0..schedule.moves {
        if step > 0 && step % schedule.moves_per_temperature == 0 {
            temperature *= schedule.gamma;
        }
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        let coord = if p >= 3 && rng.random_bool(schedule.sync_probability) {
            None
        } else {
            Some(rng.random_range(1..p))
        };
        let d = state.delta(coord, u, v);
        let accept = d <= 0.0 || (temperature > 0.0 && rng.random::<f64>() < (-d / temperature).exp());
        if accept {
            state.apply(coord, u, v, d);
            accepted += 1;
            if state.energy() < best_energy {
                best.clone_from(state.alignment());
                best_energy = state.energy();
            }
        }
        if let Some(every) = schedule.check_every {
            if (step + 1) % every == 0 {
                let drift = (state.recompute() - state.energy()).abs();
                max_drift = Some(max_drift.map_or(drift, |m: f64| m.max(drift)));
            }
        }
    }
    SearchOutcomeParts {
        best,
        best_energy,
        final_energy: state.energy(),
        accepted,
        max_drift,
    }
}

struct SearchOutcomeParts {
    best: Alignment,
    best_energy: f64,
    final_energy: f64,
    accepted: u64,
    max_drift: Option<f64>,
}

/// `σ_i` sends the vertex of rank `k` in graph 1 to the vertex of rank `k` in
/// graph `i`, ranks taken by ascending degree with ties by vertex index.
fn degree_rank_alignment(degrees: &[Vec<f64>]) -> Alignment {
    let order = |d: &Vec<f64>| {
        let mut o: Vec<usize> = (0..d.len()).collect();
        o.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        o
    };
    let reference = order(&degrees[0]);
    let perms = degrees
        .iter()
        .map(|d| {
            let mut map = vec![0; d.len()];
            for (&u, v) in reference.iter().zip(order(d)) {
                map[u] = v;
            }
            map
        })
        .map(|m| crate::perm::Permutation::from_zero_based(m).expect("rank matching is a bijection"))
        .collect();
    Alignment::new(perms).expect("first coordinate is the identity")
}

fn gaussian_degrees(index: &EdgeIndex, observed: &[Vec<f64>]) -> Vec<Vec<f64>> {
    observed
        .iter()
        .map(|w| {
            let mut d = vec![0.0; index.n()];
            for (e, x) in w.iter().enumerate() {
                let (u, v) = index.pair(e);
                d[u] += x;
                d[v] += x;
            }
            d
        })
        .collect()
}

fn er_degrees(index: &EdgeIndex, observed: &[crate::edge::EdgeSet]) -> Vec<Vec<f64>> {
    observed
        .iter()
        .map(|g| {
            let mut d = vec![0.0; index.n()];
            for e in g.iter() {
                let (u, v) = index.pair(e);
                d[u] += 1.0;
                d[v] += 1.0;
            }
            d
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn search<S, F>(
    n: usize,
    p: usize,
    schedule: &Schedule,
    t0: f64,
    method: Method,
    seed: u64,
    degrees: impl FnOnce() -> Vec<Vec<f64>>,
    init: F,
) -> Result<SearchOutcome>
where
    S: SearchState + Send,
    F: Fn(Alignment) -> S + Sync,
{
    schedule.validate()?;
    if n > schedule.max_n {
        return Err(Error::SizeCap {
            what: "annealing n",
            size: n,
            cap: schedule.max_n,
        });
    }
    if n < 2 {
        return Err(Error::InvalidParams(format!("n = {n} < 2")));
    }
    let fixed_start = match schedule.start {
        Start::Random => None,
        Start::DegreeRank => Some(degree_rank_alignment(&degrees())),
    };
    let runs: Vec<SearchOutcomeParts> = (0..schedule.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(derive_seed(seed, &[r as u64]));
            let start = init(match &fixed_start {
                Some(a) => a.clone(),
                None => Alignment::random(n, p, &mut rng),
            });
            run_search(start, schedule, t0, &mut rng)
        })
        .collect();
    let mut best_k = 0;
    for k in 1..runs.len() {
        if runs[k].best_energy < runs[best_k].best_energy {
            best_k = k;
        }
    }
    let parts = &runs[best_k];
    let max_drift = runs
        .iter()
        .filter_map(|q| q.max_drift)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    Ok(SearchOutcome {
        result: EstimatorResult {
            estimate: parts.best.clone(),
            score: -parts.best_energy,
            method,
            iterations: schedule.moves * schedule.restarts as u64,
            seed,
            ties: 1,
        },
        best_energy: parts.best_energy,
        final_energy: parts.final_energy,
        accepted: parts.accepted,
        max_drift,
    })
}

fn gaussian_t0(obs: &GaussianObservation, schedule: &Schedule) -> Result<f64> {
    match schedule.t0 {
        Some(t) => Ok(t),
        None => beta_of(obs.params.rho, obs.params.p).map(|b| 2.0 / b).map_err(|_| {
            Error::InvalidSchedule(format!(
                "rho = {} leaves beta undefined; set t0 explicitly",
                obs.params.rho
            ))
        }),
    }
}

/// Simulated annealing on the Gaussian Hamiltonian.
pub fn anneal_gaussian(obs: &GaussianObservation, schedule: &Schedule, seed: u64) -> Result<SearchOutcome> {
    let t0 = gaussian_t0(obs, schedule)?;
    let index = EdgeIndex::new(obs.params.n);
    search(obs.params.n, obs.params.p, schedule, t0, Method::Anneal, seed, || gaussian_degrees(&index, &obs.observed), |a| {
        GaussianState::new(&index, &obs.observed, a)
    })
}

/// Greedy descent on the Gaussian Hamiltonian (annealing at zero temperature).
pub fn greedy_gaussian(obs: &GaussianObservation, schedule: &Schedule, seed: u64) -> Result<SearchOutcome> {
    let index = EdgeIndex::new(obs.params.n);
    search(obs.params.n, obs.params.p, schedule, 0.0, Method::Greedy, seed, || gaussian_degrees(&index, &obs.observed), |a| {
        GaussianState::new(&index, &obs.observed, a)
    })
}

/// Simulated annealing on the exact ER Hamiltonian; default `T₀ = 2 / ln n`.
pub fn anneal_er(obs: &ErObservation, schedule: &Schedule, seed: u64) -> Result<SearchOutcome> {
    let energies = type_energies(&obs.params)?;
    let t0 = schedule.t0.unwrap_or(2.0 / (obs.params.n as f64).ln());
    let index = EdgeIndex::new(obs.params.n);
    search(obs.params.n, obs.params.p, schedule, t0, Method::Anneal, seed, || er_degrees(&index, &obs.observed), |a| {
        ErState::new(&index, &obs.observed, &energies, a)
    })
}

pub fn greedy_er(obs: &ErObservation, schedule: &Schedule, seed: u64) -> Result<SearchOutcome> {
    let energies = type_energies(&obs.params)?;
    let index = EdgeIndex::new(obs.params.n);
    search(obs.params.n, obs.params.p, schedule, 0.0, Method::Greedy, seed, || er_degrees(&index, &obs.observed), |a| {
        ErState::new(&index, &obs.observed, &energies, a)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs_er::er_log_posterior;
    use crate::gibbs_gaussian::{hamiltonian, posterior_table};
    use crate::models::{sample_er, sample_gaussian, ErParams, GaussianParams};
    use crate::perm::Permutation;

    #[test]
    fn map_on_tiny_and_uniform_tables() {
        let one = PosteriorTable::build(2, 2, 10, |_| 0.0).unwrap();
        let r = map_exhaustive(&one).unwrap();
        assert_eq!(r.estimate, Alignment::identity(2, 2));
        assert_eq!(r.ties, 2);

        let flat = PosteriorTable::build(4, 2, 100, |_| -3.0).unwrap();
        let r = map_exhaustive(&flat).unwrap();
        assert_eq!(r.estimate, Alignment::identity(4, 2));
        assert_eq!(r.ties, 24);
    }

    #[test]
    fn map_maximises() {
        let s = sample_gaussian(GaussianParams::new(5, 2, 0.7).unwrap(), 3).unwrap();
        let t = posterior_table(&s.observation(), None, 1000).unwrap();
        let r = map_exhaustive(&t).unwrap();
        let top = t.log_weight_of(&r.estimate).unwrap();
        assert!(t.log_weights().iter().all(|&w| w <= top));
        assert!((r.score - (top - t.log_partition())).abs() < 1e-12);
    }

    #[test]
    fn concentration_limits() {
        let flat = PosteriorTable::build(4, 2, 100, |_| 0.0).unwrap();
        let c0 = concentration(&flat, 0.0, Metric::D).unwrap();
        assert!((c0.c_n - 1.0 / 24.0).abs() < 1e-12);
        let c1 = concentration(&flat, 1.0, Metric::Dc).unwrap();
        assert!((c1.c_n - 1.0).abs() < 1e-12);
        assert!(concentration(&flat, -0.1, Metric::D).is_err());
    }

    #[test]
    fn concentration_monotone_and_dominates_map() {
        let s = sample_gaussian(GaussianParams::new(4, 2, 0.6).unwrap(), 11).unwrap();
        let t = posterior_table(&s.observation(), None, 100).unwrap();
        let top = t.probabilities().into_iter().fold(0.0, f64::max);
        for metric in [Metric::D, Metric::Dw, Metric::Dc] {
            let mut prev = 0.0;
            for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let c = concentration(&t, r, metric).unwrap();
                assert!(c.c_n >= prev - 1e-15);
                assert!(c.c_n >= top - 1e-15);
                prev = c.c_n;
            }
        }
        let c0 = concentration(&t, 0.0, Metric::D).unwrap();
        assert!((c0.c_n - top).abs() < 1e-15);
        assert_eq!(ball_optimal(&t, 0.0, Metric::D).unwrap().estimate, map_exhaustive(&t).unwrap().estimate);
    }

    #[test]
    fn score_examples() {
        let mut rng = seeded_rng(0);
        let truth = Alignment::random(7, 3, &mut rng);
        assert_eq!(score(&truth, &truth).unwrap().ov, 1.0);
        let cycle = Permutation::from_zero_based((0..7).map(|x| (x + 1) % 7).collect()).unwrap();
        let mut perms = truth.perms().to_vec();
        perms[1] = perms[1].compose(&cycle).unwrap();
        let est = Alignment::new(perms).unwrap();
        assert_eq!(score(&est, &truth).unwrap().ov, 0.0);
    }

    #[test]
    fn schedule_validation() {
        let s = sample_gaussian(GaussianParams::new(6, 2, 0.5).unwrap(), 1).unwrap();
        let obs = s.observation();
        for bad in [
            Schedule { gamma: 1.0, ..Schedule::default() },
            Schedule { gamma: 1.2, ..Schedule::default() },
            Schedule { t0: Some(0.0), ..Schedule::default() },
            Schedule { t0: Some(-1.0), ..Schedule::default() },
        ] {
            assert!(matches!(anneal_gaussian(&obs, &bad, 0), Err(Error::InvalidSchedule(_))));
        }
        let one = sample_gaussian(GaussianParams::new(6, 2, 1.0).unwrap(), 1).unwrap();
        assert!(matches!(
            anneal_gaussian(&one.observation(), &Schedule::default(), 0),
            Err(Error::InvalidSchedule(_))
        ));
        let big = sample_gaussian(GaussianParams::new(8, 2, 0.5).unwrap(), 1).unwrap();
        let capped = Schedule { max_n: 7, ..Schedule::default() };
        assert!(matches!(anneal_gaussian(&big.observation(), &capped, 0), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn gaussian_incremental_energy_is_exact() {
        for p in [2, 3, 4] {
            let s = sample_gaussian(GaussianParams::new(12, p, 0.5).unwrap(), p as u64).unwrap();
            let sched = Schedule {
                moves: 20_000,
                check_every: Some(1000),
                ..Schedule::default()
            };
            let out = anneal_gaussian(&s.observation(), &sched, 5).unwrap();
            assert!(out.max_drift.unwrap() < 1e-6, "{:?}", out.max_drift);
            let h = hamiltonian(&s.observed, &out.result.estimate).unwrap();
            assert!((h - out.best_energy).abs() < 1e-6);
            assert!(out.best_energy <= out.final_energy);
        }
    }

    #[test]
    fn er_incremental_energy_is_exact() {
        for p in [2, 3] {
            let params = ErParams::new(15, p, 3.0, 0.7).unwrap();
            let s = sample_er(params, 8).unwrap();
            let sched = Schedule {
                moves: 20_000,
                check_every: Some(1000),
                ..Schedule::default()
            };
            let out = anneal_er(&s.observation(), &sched, 2).unwrap();
            assert!(out.max_drift.unwrap() < 1e-9);
            let exact = er_log_posterior(&s.observed, &out.result.estimate, &params)
                .unwrap()
                .hamiltonian_exact;
            assert!((exact - out.best_energy).abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_never_worsens() {
        let s = sample_gaussian(GaussianParams::new(10, 3, 0.5).unwrap(), 2).unwrap();
        let out = greedy_gaussian(&s.observation(), &Schedule { moves: 5000, ..Schedule::default() }, 1).unwrap();
        assert_eq!(out.best_energy, out.final_energy);
        assert_eq!(out.result.method, Method::Greedy);
    }
}
