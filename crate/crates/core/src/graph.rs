//! Simple undirected graphs for automorphism and component work.

use crate::edge::{EdgeIndex, EdgeSet};
use crate::error::{Error, Result};
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    /// From zero-based pairs; duplicates are ignored, self-loops rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: u.max(v) + 1,
                    n,
                });
            }
            if u == v {
                return Err(Error::SelfLoop(u + 1));
            }
            if !g.adj[u].contains(&v) {
                g.adj[u].push(v);
                g.adj[v].push(u);
                g.edges.push((u.min(v), u.max(v)));
            }
        }
        for list in &mut g.adj {
            list.sort_unstable();
        }
        g.edges.sort_unstable();
        Ok(g)
    }

    pub fn from_edge_set(index: &EdgeIndex, set: &EdgeSet) -> Self {
        let pairs: Vec<_> = set.iter().map(|e| index.pair(e)).collect();
        Graph::from_edges(index.n(), &pairs).expect("edge index pairs are valid")
    }

    /// Graph on `n ≤ 11` vertices whose edges are the set bits of `mask` in
    /// lexicographic pair order.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let index = EdgeIndex::new(n);
        let pairs: Vec<_> = (0..index.len())
            .filter(|&e| mask >> e & 1 == 1)
            .map(|e| index.pair(e))
            .collect();
        Graph::from_edges(n, &pairs).expect("valid pairs")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let u = comp[k];
                k += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// `σ(E) = E`.
    pub fn is_automorphism(&self, sigma: &Permutation) -> bool {
        sigma.len() == self.n
            && self
                .edges
                .iter()
                .all(|&(u, v)| self.has_edge(sigma.apply(u), sigma.apply(v)))
    }

    /// Every automorphism, by filtering all of `S_n`. Only for small `n`.
    pub fn automorphisms_brute_force(&self) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur = Permutation::identity(self.n);
        loop {
            if self.is_automorphism(&cur) {
                out.push(cur.clone());
            }
            if !cur.advance_lexicographic() {
                break;
            }
        }
        out
    }
}
