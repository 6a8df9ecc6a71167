//! Automorphisms of small graphs: component-preserving counts against the
//! degree-factorial bound, and explicit symmetries obtained by swapping
//! isomorphic connected components.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math::ln_factorial;
use crate::perm::Permutation;

/// Largest graph handled by the brute-force counter.
pub const MAX_BRUTE_FORCE_VERTICES: usize = 10;

/// Default component-size cap for canonical forms.
pub const DEFAULT_COMPONENT_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AutomorphismBoundCheck {
    /// Automorphisms sending every connected component to itself.
    pub count: u128,
    /// `Π_v d_v!`, saturating.
    pub bound: u128,
    pub ok: bool,
    /// `Π_v d_v! · 2^(#components that are a single edge)`, saturating.
    pub bound_with_edge_flips: u128,
}

fn factorial_u128(k: usize) -> u128 {
    (2..=k as u128).fold(1u128, |acc, j| acc.saturating_mul(j))
}

/// `Π_v d_v!`.
pub fn degree_factorial_product(g: &Graph) -> u128 {
    (0..g.n()).fold(1u128, |acc, v| acc.saturating_mul(factorial_u128(g.degree(v))))
}

/// Automorphisms of the subgraph induced on `comp`, by filtering all `k!`
/// permutations of the component's vertices.
fn component_automorphisms(g: &Graph, comp: &[usize]) -> u128 {
    let k = comp.len();
    let mut pos = vec![usize::MAX; g.n()];
    for (a, &v) in comp.iter().enumerate() {
        pos[v] = a;
    }
    let local: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter(|(u, _)| pos[*u] != usize::MAX)
        .map(|&(u, v)| (pos[u], pos[v]))
        .collect();
    let local_graph = Graph::from_edges(k, &local).expect("valid local edges");
    let mut cur = Permutation::identity(k);
    let mut count = 0u128;
    loop {
        if local_graph.is_automorphism(&cur) {
            count += 1;
        }
        if !cur.advance_lexicographic() {
            break;
        }
    }
    count
}

/// Exact count of component-preserving automorphisms, compared with `Π d_v!`.
pub fn component_preserving_automorphism_bound(g: &Graph) -> Result<AutomorphismBoundCheck> {
    if g.n() > MAX_BRUTE_FORCE_VERTICES {
        return Err(Error::SizeCap {
            what: "graph vertex count",
            size: g.n(),
            cap: MAX_BRUTE_FORCE_VERTICES,
        });
    }
    let comps = g.components();
    let count = comps
        .iter()
        .map(|c| component_automorphisms(g, c))
        .product::<u128>();
    let bound = degree_factorial_product(g);
    let edge_components = comps.iter().filter(|c| c.len() == 2).count() as u32;
    Ok(AutomorphismBoundCheck {
        count,
        bound,
        ok: count <= bound,
        bound_with_edge_flips: bound.saturating_mul(1u128 << edge_components),
    })
}

/// The same count by filtering all of `S_n` for automorphisms that map every
/// component onto itself. Independent of the per-component product.
pub fn component_preserving_count_global(g: &Graph) -> Result<u128> {
    if g.n() > MAX_BRUTE_FORCE_VERTICES {
        return Err(Error::SizeCap {
            what: "graph vertex count",
            size: g.n(),
            cap: MAX_BRUTE_FORCE_VERTICES,
        });
    }
    let mut label = vec![0usize; g.n()];
    for (k, comp) in g.components().iter().enumerate() {
        for &v in comp {
            label[v] = k;
        }
    }
    let mut cur = Permutation::identity(g.n());
    let mut count = 0u128;
    loop {
        if (0..g.n()).all(|v| label[cur.apply(v)] == label[v]) && g.is_automorphism(&cur) {
            count += 1;
        }
        if !cur.advance_lexicographic() {
            break;
        }
    }
    Ok(count)
}

/// Canonical code of a small labelled graph: the minimum upper-triangle bit
/// string over all relabellings, with a labelling achieving it.
#[derive(Default)]
struct CanonicalCache {
    memo: HashMap<(usize, u64), (u64, Vec<usize>)>,
}

fn pair_bit(k: usize, a: usize, b: usize) -> u32 {
    let (a, b) = (a.min(b), a.max(b));
    // Lexicographic position of (a, b) among pairs of ⟦0, k⟧.
    (a * (2 * k - a - 1) / 2 + (b - a - 1)) as u32
}

fn encode(k: usize, edges: &[(usize, usize)], relabel: &[usize]) -> u64 {
    edges
        .iter()
        .fold(0u64, |code, &(a, b)| code | 1u64 << pair_bit(k, relabel[a], relabel[b]))
}

impl CanonicalCache {
    /// `edges` are local indices `0..k`. Returns `(code, relabel)` where
    /// `relabel[local] = canonical position`.
    fn canonical(&mut self, k: usize, edges: &[(usize, usize)]) -> (u64, Vec<usize>) {
        let key = (k, encode(k, edges, &(0..k).collect::<Vec<_>>()));
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let mut cur = Permutation::identity(k);
        let mut best = (u64::MAX, Vec::new());
        loop {
            let code = encode(k, edges, cur.as_slice());
            if code < best.0 {
                best = (code, cur.as_slice().to_vec());
            }
            if !cur.advance_lexicographic() {
                break;
            }
        }
        self.memo.insert(key, best.clone());
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentClass {
    /// Component size.
    pub size: usize,
    /// Canonical edge code shared by the class.
    pub code: u64,
    /// Members, each listed in canonical vertex order (zero-based).
    pub components: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryFamily {
    /// Isomorphism classes of unprotected components, in order of first appearance.
    pub classes: Vec<ComponentClass>,
    /// `ln Π_c ⌈m_c!/3⌉` over the class sizes `m_c`.
    pub log_count_lower_bound: f64,
    /// The same product when it fits a `u128`.
    pub count_lower_bound: Option<u128>,
    /// Explicit automorphisms; each was checked to preserve the edge set and
    /// fix every protected vertex.
    pub automorphisms: Vec<Permutation>,
}

fn ceil_factorial_over_three(m: usize) -> Option<u128> {
    (2..=m as u128)
        .try_fold(1u128, |acc, j| acc.checked_mul(j))
        .map(|f| f.div_ceil(3))
}

/// Groups the components of `g` not touching `protected` by isomorphism type
/// and emits automorphisms that cyclically shift the members of a class,
/// leaving every other vertex fixed. At most `max_emit` are materialised.
pub fn component_symmetries(
    g: &Graph,
    protected: &[usize],
    component_cap: usize,
    max_emit: usize,
) -> Result<SymmetryFamily> {
    let n = g.n();
    let mut is_protected = vec![false; n];
    for &v in protected {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v + 1, n });
        }
        is_protected[v] = true;
    }
    let cap = component_cap.min(11);
    let mut cache = CanonicalCache::default();
    let mut classes: Vec<ComponentClass> = Vec::new();
    let mut by_key: HashMap<(usize, u64), usize> = HashMap::new();
    for comp in g.components() {
        if comp.iter().any(|&v| is_protected[v]) {
            continue;
        }
        if comp.len() > cap {
            return Err(Error::SizeCap {
                what: "component size",
                size: comp.len(),
                cap,
            });
        }
        let k = comp.len();
        let local_of: HashMap<usize, usize> = comp.iter().enumerate().map(|(a, &v)| (v, a)).collect();
        let local: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter_map(|(u, v)| Some((*local_of.get(u)?, *local_of.get(v)?)))
            .collect();
        let (code, relabel) = cache.canonical(k, &local);
        let mut ordered = vec![0usize; k];
        for (a, &pos) in relabel.iter().enumerate() {
            ordered[pos] = comp[a];
        }
        let slot = *by_key.entry((k, code)).or_insert_with(|| {
            classes.push(ComponentClass {
                size: k,
                code,
                components: Vec::new(),
            });
            classes.len() - 1
        });
        classes[slot].components.push(ordered);
    }

    let mut log_bound = 0.0;
    let mut exact: Option<u128> = Some(1);
    for class in &classes {
        let m = class.components.len();
        match ceil_factorial_over_three(m) {
            Some(c) => {
                log_bound += (c as f64).ln();
                exact = exact.and_then(|e| e.checked_mul(c));
            }
            None => {
                log_bound += ln_factorial(m) - 3f64.ln();
                exact = None;
            }
        }
    }

    let mut automorphisms = Vec::new();
    'emit: for class in classes.iter().filter(|c| c.components.len() >= 2) {
        let m = class.components.len();
        for shift in 1..m {
            if automorphisms.len() >= max_emit {
                break 'emit;
            }
            let mut map: Vec<usize> = (0..n).collect();
            for (c, comp) in class.components.iter().enumerate() {
                let target = &class.components[(c + shift) % m];
                for (pos, &v) in comp.iter().enumerate() {
                    map[v] = target[pos];
                }
            }
            let sigma = Permutation::from_zero_based(map)?;
            assert!(g.is_automorphism(&sigma), "emitted permutation breaks an edge");
            assert!(
                protected.iter().all(|&v| sigma.apply(v) == v),
                "emitted permutation moves a protected vertex"
            );
            automorphisms.push(sigma);
        }
    }

    Ok(SymmetryFamily {
        classes,
        log_count_lower_bound: log_bound,
        count_lower_bound: exact,
        automorphisms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge::{EdgeIndex, EdgeSet};
    use crate::rng::seeded_rng;
    use rand::Rng;

    #[test]
    fn hand_examples() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let c = component_preserving_automorphism_bound(&path).unwrap();
        assert_eq!((c.count, c.bound, c.ok), (2, 2, true));

        let triangle = Graph::from_mask(3, 0b111);
        let c = component_preserving_automorphism_bound(&triangle).unwrap();
        assert_eq!((c.count, c.bound, c.ok), (6, 8, true));

        let empty = Graph::empty(4);
        let c = component_preserving_automorphism_bound(&empty).unwrap();
        assert_eq!((c.count, c.bound, c.ok), (1, 1, true));
    }

    #[test]
    fn single_edge_component_exceeds_degree_product() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let c = component_preserving_automorphism_bound(&g).unwrap();
        assert_eq!((c.count, c.bound), (2, 1));
        assert!(!c.ok);
        assert_eq!(c.bound_with_edge_flips, 2);
    }

    #[test]
    fn product_matches_global_filter() {
        for mask in (0u64..1 << 10).step_by(7) {
            let g = Graph::from_mask(5, mask);
            let c = component_preserving_automorphism_bound(&g).unwrap();
            assert_eq!(c.count, component_preserving_count_global(&g).unwrap());
        }
        assert!(component_preserving_automorphism_bound(&Graph::empty(11)).is_err());
    }

    #[test]
    fn two_disjoint_edges_swap() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let fam = component_symmetries(&g, &[], DEFAULT_COMPONENT_CAP, 10).unwrap();
        assert_eq!(fam.classes.len(), 1);
        assert_eq!(fam.classes[0].components.len(), 2);
        assert_eq!(fam.count_lower_bound, Some(1));
        assert_eq!(fam.automorphisms.len(), 1);
        let s = &fam.automorphisms[0];
        assert_eq!(s.fixed_points(), 0);
    }

    #[test]
    fn distinct_shapes_only_identity() {
        let g = Graph::from_edges(6, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        // Components: an edge, a path on three vertices, an isolated vertex.
        let fam = component_symmetries(&g, &[], DEFAULT_COMPONENT_CAP, 10).unwrap();
        assert_eq!(fam.classes.len(), 3);
        assert_eq!(fam.count_lower_bound, Some(1));
        assert!(fam.automorphisms.is_empty());
    }

    #[test]
    fn protected_and_oversized() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(matches!(
            component_symmetries(&g, &[], 3, 10),
            Err(Error::SizeCap { .. })
        ));
        let fam = component_symmetries(&g, &[0], 3, 10).unwrap();
        assert_eq!(fam.classes.len(), 1);
    }

    #[test]
    fn subcritical_symmetries_verify() {
        let n = 200;
        let idx = EdgeIndex::new(n);
        let mut rng = seeded_rng(42);
        let q = 0.5 / n as f64;
        let set = EdgeSet::from_indices(idx.len(), (0..idx.len()).filter(|_| rng.random_bool(q)));
        let g = Graph::from_edge_set(&idx, &set);
        let big: Vec<usize> = g
            .components()
            .into_iter()
            .filter(|c| c.len() > DEFAULT_COMPONENT_CAP)
            .flatten()
            .collect();
        let fam = component_symmetries(&g, &big, DEFAULT_COMPONENT_CAP, 1000).unwrap();
        assert!(!fam.automorphisms.is_empty());
        for s in &fam.automorphisms {
            assert_eq!(set.image(&idx, s), set);
        }
        assert!(fam.log_count_lower_bound > 10.0);
    }
}
