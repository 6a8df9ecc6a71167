//! Maximum spanning trees of weighted complete graphs and the lower bound
//! `max_τ S*(τ) ≥ 2S̄ / (1 + S̄)`, `S̄ = Σ_{i≠j} x_ij² / (p(p−1))`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCompleteGraph {
    x: Vec<Vec<f64>>,
}

impl WeightedCompleteGraph {
    /// Validates symmetry, a zero diagonal, and weights in `[0, 1]`.
    pub fn new(x: Vec<Vec<f64>>) -> Result<Self> {
        let p = x.len();
        if p == 0 || x.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("weights must be a nonempty square matrix".to_string()));
        }
        for i in 0..p {
            if x[i][i] != 0.0 {
                return Err(Error::InvalidParams(format!("x_{0}{0} must be 0", i + 1)));
            }
            for j in 0..p {
                if x[i][j] != x[j][i] || !(0.0..=1.0).contains(&x[i][j]) {
                    return Err(Error::InvalidParams(format!(
                        "x_{}{} = {} breaks symmetry or [0, 1]",
                        i + 1,
                        j + 1,
                        x[i][j]
                    )));
                }
            }
        }
        Ok(WeightedCompleteGraph { x })
    }

    pub fn constant(p: usize, w: f64) -> Result<Self> {
        let x = (0..p)
            .map(|i| (0..p).map(|j| if i == j { 0.0 } else { w }).collect())
            .collect();
        Self::new(x)
    }

    /// Independent uniform weights on `[0, 1)`.
    pub fn random<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Self {
        let mut x = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in (i + 1)..p {
                let w: f64 = rng.random();
                x[i][j] = w;
                x[j][i] = w;
            }
        }
        WeightedCompleteGraph { x }
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.x[i][j]
    }

    /// `S̄ = Σ_{i≠j} x_ij² / (p(p−1))`.
    pub fn mean_square(&self) -> f64 {
        let p = self.p();
        let s: f64 = self.x.iter().flatten().map(|w| w * w).sum();
        s / (p * (p - 1)) as f64
    }

    fn tree_weight(&self, edges: &[(usize, usize)]) -> f64 {
        edges.iter().map(|&(a, b)| self.x[a][b]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanningTree {
    pub weight: f64,
    pub edges: Vec<(usize, usize)>,
}

/// Prim's algorithm from vertex 0. Among equal-weight candidates the smallest
/// outside vertex wins, attached to the earliest tree vertex reaching that weight.
pub fn max_spanning_tree_weight(g: &WeightedCompleteGraph) -> SpanningTree {
    let p = g.p();
    let mut in_tree = vec![false; p];
    in_tree[0] = true;
    // best[v] = (weight, parent) of the heaviest link from the tree to v.
    let mut best: Vec<(f64, usize)> = (0..p).map(|v| (g.x[0][v], 0)).collect();
    let mut edges = Vec::with_capacity(p.saturating_sub(1));
    for _ in 1..p {
        let mut pick: Option<usize> = None;
        for v in 0..p {
            if in_tree[v] {
                continue;
            }
            match pick {
                None => pick = Some(v),
                Some(u) if best[v].0 > best[u].0 => pick = Some(v),
                _ => {}
            }
        }
        let v = pick.expect("a vertex remains");
        in_tree[v] = true;
        edges.push((best[v].1.min(v), best[v].1.max(v)));
        for w in 0..p {
            if !in_tree[w] && g.x[v][w] > best[w].0 {
                best[w] = (g.x[v][w], v);
            }
        }
    }
    SpanningTree {
        weight: g.tree_weight(&edges),
        edges,
    }
}

/// `Σ_{i≥2} max_{j<i} x_{τ(j)τ(i)} = (p−1) S*(τ)`.
pub fn greedy_order_weight(g: &WeightedCompleteGraph, tau: &Permutation) -> f64 {
    (1..tau.len())
        .map(|i| {
            (0..i)
                .map(|j| g.x[tau.apply(j)][tau.apply(i)])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum()
}

/// Heaviest spanning tree by decoding every Prüfer sequence (`p^(p−2)` trees).
pub fn exhaustive_max_spanning_tree(g: &WeightedCompleteGraph) -> f64 {
    let p = g.p();
    if p < 2 {
        return 0.0;
    }
    if p == 2 {
        return g.x[0][1];
    }
    let len = p - 2;
    let total = p.pow(len as u32);
    let mut best = f64::NEG_INFINITY;
    let mut seq = vec![0usize; len];
    for code in 0..total {
        let mut c = code;
        for slot in seq.iter_mut().rev() {
            *slot = c % p;
            c /= p;
        }
        best = best.max(g.tree_weight(&prufer_decode(&seq, p)));
    }
    best
}

fn prufer_decode(seq: &[usize], p: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; p];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(p - 1);
    for &s in seq {
        let leaf = (0..p).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..p).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpanningCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub const SPANNING_TOL: f64 = 1e-12;

/// `lhs = MST weight / (p−1)`, `rhs = 2S̄/(1+S̄)`.
pub fn check_spanning_bound(g: &WeightedCompleteGraph) -> Result<SpanningCheck> {
    let p = g.p();
    if p < 2 {
        return Err(Error::InvalidParams(format!("p = {p} < 2")));
    }
    let lhs = max_spanning_tree_weight(g).weight / (p - 1) as f64;
    let s = g.mean_square();
    let rhs = 2.0 * s / (1.0 + s);
    Ok(SpanningCheck {
        lhs,
        rhs,
        ok: lhs >= rhs - SPANNING_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::all_permutations;
    use crate::rng::seeded_rng;
    use proptest::prelude::*;

    #[test]
    fn simple_cases() {
        let g = WeightedCompleteGraph::new(vec![vec![0.0, 0.3], vec![0.3, 0.0]]).unwrap();
        assert_eq!(max_spanning_tree_weight(&g).weight, 0.3);
        let c = WeightedCompleteGraph::constant(5, 0.4).unwrap();
        assert!((max_spanning_tree_weight(&c).weight - 1.6).abs() < 1e-15);
        let ones = WeightedCompleteGraph::constant(4, 1.0).unwrap();
        let r = check_spanning_bound(&ones).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        assert!(r.ok);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightedCompleteGraph::new(vec![vec![0.0, 0.3], vec![0.2, 0.0]]).is_err());
        assert!(WeightedCompleteGraph::new(vec![vec![0.0, 1.3], vec![1.3, 0.0]]).is_err());
        assert!(WeightedCompleteGraph::new(vec![vec![0.1]]).is_err());
    }

    #[test]
    fn prim_matches_prufer_enumeration() {
        let mut rng = seeded_rng(10);
        for _ in 0..200 {
            let g = WeightedCompleteGraph::random(5, &mut rng);
            let prim = max_spanning_tree_weight(&g).weight;
            assert!((prim - exhaustive_max_spanning_tree(&g)).abs() < 1e-12);
        }
    }

    #[test]
    fn prim_dominates_every_insertion_order() {
        let mut rng = seeded_rng(11);
        for p in 2..=6 {
            for _ in 0..20 {
                let g = WeightedCompleteGraph::random(p, &mut rng);
                let prim = max_spanning_tree_weight(&g).weight;
                let best = all_permutations(p)
                    .iter()
                    .map(|tau| greedy_order_weight(&g, tau))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(prim >= best - 1e-12);
                assert!((prim - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ties_are_deterministic() {
        let g = WeightedCompleteGraph::constant(4, 0.5).unwrap();
        assert_eq!(max_spanning_tree_weight(&g).edges, vec![(0, 1), (0, 2), (0, 3)]);
    }

    proptest! {
        #[test]
        fn two_vertex_bound_is_a_square(x in 0.0f64..=1.0) {
            let g = WeightedCompleteGraph::new(vec![vec![0.0, x], vec![x, 0.0]]).unwrap();
            let r = check_spanning_bound(&g).unwrap();
            prop_assert!(r.ok);
            prop_assert!((r.lhs - x).abs() < 1e-15);
            prop_assert!((r.rhs - 2.0 * x * x / (1.0 + x * x)).abs() < 1e-15);
        }
    }
}
