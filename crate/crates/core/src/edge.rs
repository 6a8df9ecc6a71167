//! Canonical enumeration of the unordered vertex pairs of `K_n` and edge sets
//! stored as bitsets over that enumeration.

use bitvec::prelude::*;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Lexicographic indexing of the pairs `{u, v}`, `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
    table: Vec<usize>,
}

impl EdgeIndex {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        let mut table = vec![usize::MAX; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                table[u * n + v] = pairs.len();
                table[v * n + u] = pairs.len();
                pairs.push((u, v));
            }
        }
        EdgeIndex { n, pairs, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C(n, 2)`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Zero-based pair to index. Symmetric in its arguments; panics on `u == v`.
    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        let idx = self.table[u * self.n + v];
        debug_assert!(idx != usize::MAX, "self-loop {u}");
        idx
    }

    /// Index to zero-based pair with `u < v`.
    #[inline]
    pub fn pair(&self, idx: usize) -> (usize, usize) {
        self.pairs[idx]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Validated one-based lookup.
    pub fn index_one_based(&self, u: usize, v: usize) -> Result<usize> {
        let (u, v) = self.check_pair(u, v)?;
        Ok(self.index(u, v))
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(usize, usize)> {
        for x in [u, v] {
            if x == 0 || x > self.n {
                return Err(Error::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok((u - 1, v - 1))
    }

    /// Index of `σ(e)`.
    #[inline]
    pub fn permute(&self, sigma: &Permutation, idx: usize) -> usize {
        let (u, v) = self.pairs[idx];
        self.index(sigma.apply(u), sigma.apply(v))
    }

    /// The induced permutation of edge indices: entry `e` is the index of `σ(e)`.
    pub fn edge_map(&self, sigma: &Permutation) -> Vec<usize> {
        debug_assert_eq!(sigma.len(), self.n);
        (0..self.len()).map(|e| self.permute(sigma, e)).collect()
    }
}

/// `σ({u, v}) = {σ(u), σ(v)}` on one-based vertices, returned sorted.
pub fn edge_action(sigma: &Permutation, edge: (usize, usize)) -> Result<(usize, usize)> {
    let n = sigma.len();
    let (u, v) = edge;
    for x in [u, v] {
        if x == 0 || x > n {
            return Err(Error::VertexOutOfRange { vertex: x, n });
        }
    }
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    let a = sigma.apply(u - 1) + 1;
    let b = sigma.apply(v - 1) + 1;
    Ok((a.min(b), a.max(b)))
}

/// A subset of the edges of `K_n`, as a bitset over the canonical index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    bits: BitVec<u64, Lsb0>,
}

impl EdgeSet {
    pub fn empty(edge_count: usize) -> Self {
        EdgeSet {
            bits: bitvec![u64, Lsb0; 0; edge_count],
        }
    }

    pub fn from_indices(edge_count: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(edge_count);
        for e in indices {
            s.insert(e);
        }
        s
    }

    /// Number of slots, i.e. `C(n, 2)`.
    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        self.bits[e]
    }

    #[inline]
    pub fn insert(&mut self, e: usize) {
        self.bits.set(e, true);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.iter().all(|e| other.contains(e))
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            bits: self.bits.clone() & other.bits.as_bitslice(),
        }
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            bits: self.bits.clone() | other.bits.as_bitslice(),
        }
    }

    /// Set image `σ(S) = {σ(e) : e ∈ S}`.
    pub fn image(&self, index: &EdgeIndex, sigma: &Permutation) -> EdgeSet {
        EdgeSet::from_indices(self.capacity(), self.iter().map(|e| index.permute(sigma, e)))
    }

    /// Sorted one-based pairs.
    pub fn to_pairs(&self, index: &EdgeIndex) -> Vec<(usize, usize)> {
        self.iter()
            .map(|e| {
                let (u, v) = index.pair(e);
                (u + 1, v + 1)
            })
            .collect()
    }

    pub fn from_pairs(index: &EdgeIndex, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut s = Self::empty(index.len());
        for &(u, v) in pairs {
            s.insert(index.index_one_based(u, v)?);
        }
        Ok(s)
    }
}
