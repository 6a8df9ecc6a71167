//! Alignments `(π₁ = Id, π₂, …, π_p)` and their exhaustive enumeration.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Alignment {
    perms: Vec<Permutation>,
}

impl Alignment {
    /// Validates `p ≥ 2`, a common `n`, and that the first coordinate is the identity.
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        if perms.len() < 2 {
            return Err(Error::InvalidAlignment(format!(
                "need p >= 2 permutations, got {}",
                perms.len()
            )));
        }
        let n = perms[0].len();
        if let Some(bad) = perms.iter().find(|q| q.len() != n) {
            return Err(Error::InvalidAlignment(format!(
                "mixed sizes {} and {}",
                n,
                bad.len()
            )));
        }
        if !perms[0].is_identity() {
            return Err(Error::InvalidAlignment(
                "first permutation must be the identity".to_string(),
            ));
        }
        Ok(Alignment { perms })
    }

    pub fn identity(n: usize, p: usize) -> Self {
        Alignment {
            perms: vec![Permutation::identity(n); p],
        }
    }

    /// `Id` followed by `p − 1` independent uniform permutations.
    pub fn random<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Self {
        let mut perms = Vec::with_capacity(p);
        perms.push(Permutation::identity(n));
        for _ in 1..p {
            perms.push(Permutation::random(n, rng));
        }
        Alignment { perms }
    }

    pub fn n(&self) -> usize {
        self.perms[0].len()
    }

    pub fn p(&self) -> usize {
        self.perms.len()
    }

    /// Coordinate `i` (zero-based graph index).
    pub fn perm(&self, i: usize) -> &Permutation {
        &self.perms[i]
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub(crate) fn perm_mut(&mut self, i: usize) -> &mut Permutation {
        debug_assert!(i > 0, "the first coordinate is pinned to the identity");
        &mut self.perms[i]
    }

    pub fn same_shape(&self, other: &Alignment) -> Result<()> {
        if self.n() != other.n() || self.p() != other.p() {
            return Err(Error::DimensionMismatch(format!(
                "alignment (n = {}, p = {}) vs (n = {}, p = {})",
                self.n(),
                self.p(),
                other.n(),
                other.p()
            )));
        }
        Ok(())
    }

    /// `(π₁, σ∘π₂, …, σ∘π_p)`.
    pub fn left_compose_tail(&self, sigma: &Permutation) -> Result<Alignment> {
        if sigma.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "sigma has n = {}, alignment has n = {}",
                sigma.len(),
                self.n()
            )));
        }
        let mut perms = self.perms.clone();
        for q in perms.iter_mut().skip(1) {
            *q = sigma.compose_unchecked(q);
        }
        Ok(Alignment { perms })
    }

    /// `(τ π_i τ⁻¹)_i`: the same alignment after relabelling every vertex by `τ`.
    pub fn conjugate(&self, tau: &Permutation) -> Result<Alignment> {
        if tau.len() != self.n() {
            return Err(Error::DimensionMismatch("conjugate: size".to_string()));
        }
        let inv = tau.inverse();
        let perms = self
            .perms
            .iter()
            .map(|q| tau.compose_unchecked(&q.compose_unchecked(&inv)))
            .collect();
        Ok(Alignment { perms })
    }

    /// Semicolon-joined one-line permutations, e.g. `[1 2 3];[2 1 3]`.
    pub fn to_compact_string(&self) -> String {
        self.perms
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse_compact(s: &str) -> Result<Alignment> {
        let perms = s
            .split(';')
            .map(|part| {
                let inner = part.trim().trim_start_matches('[').trim_end_matches(']');
                let images = inner
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<usize>().map_err(|_| {
                            Error::InvalidPermutation(format!("cannot parse `{tok}`"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Permutation::from_one_based(&images)
            })
            .collect::<Result<Vec<_>>>()?;
        Alignment::new(perms)
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact_string())
    }
}

impl<'de> Deserialize<'de> for Alignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let perms = Vec::<Permutation>::deserialize(d)?;
        Alignment::new(perms).map_err(serde::de::Error::custom)
    }
}

/// `(n!)^(p−1)` if it fits in a `u128`.
pub fn alignment_count(n: usize, p: usize) -> Option<u128> {
    let mut fact: u128 = 1;
    for k in 2..=n as u128 {
        fact = fact.checked_mul(k)?;
    }
    let mut total: u128 = 1;
    for _ in 1..p {
        total = total.checked_mul(fact)?;
    }
    Some(total)
}

/// Errors unless `(n!)^(p−1) ≤ cap`; returns the count.
pub fn check_enumerable(n: usize, p: usize, cap: u64) -> Result<u64> {
    match alignment_count(n, p) {
        Some(c) if c <= cap as u128 => Ok(c as u64),
        Some(c) => Err(Error::StateSpaceTooLarge {
            states: c.to_string(),
            cap,
        }),
        None => Err(Error::StateSpaceTooLarge {
            states: format!("({n}!)^{}", p.saturating_sub(1)),
            cap,
        }),
    }
}

/// All permutations of `⟦1, n⟧` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur = Permutation::identity(n);
    loop {
        out.push(cur.clone());
        if !cur.advance_lexicographic() {
            break;
        }
    }
    out
}

/// Odometer over `(S_n)^(p−1)`: the last coordinate varies fastest, each
/// coordinate runs through `S_n` in lexicographic order.
pub struct AlignmentEnumerator {
    base: Vec<Permutation>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for AlignmentEnumerator {
    type Item = Alignment;

    fn next(&mut self) -> Option<Alignment> {
        if self.done {
            return None;
        }
        let n = self.base[0].len();
        let mut perms = Vec::with_capacity(self.digits.len() + 1);
        perms.push(Permutation::identity(n));
        perms.extend(self.digits.iter().map(|&d| self.base[d].clone()));
        let item = Alignment { perms };

        let mut k = self.digits.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < self.base.len() {
                break;
            }
            self.digits[k] = 0;
        }
        Some(item)
    }
}

/// Every alignment exactly once, in a fixed order; fails loudly above `cap`.
pub fn enumerate_alignments(n: usize, p: usize, cap: u64) -> Result<AlignmentEnumerator> {
    if p < 2 {
        return Err(Error::InvalidParams(format!("p = {p} < 2")));
    }
    check_enumerable(n, p, cap)?;
    Ok(AlignmentEnumerator {
        base: all_permutations(n),
        digits: vec![0; p - 1],
        done: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts() {
        assert_eq!(enumerate_alignments(3, 2, DEFAULT_ENUMERATION_CAP).unwrap().count(), 6);
        assert_eq!(enumerate_alignments(4, 3, DEFAULT_ENUMERATION_CAP).unwrap().count(), 576);
        assert_eq!(enumerate_alignments(2, 4, DEFAULT_ENUMERATION_CAP).unwrap().count(), 8);
    }

    #[test]
    fn no_duplicates_and_identity_first() {
        let all: Vec<_> = enumerate_alignments(3, 3, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .collect();
        assert!(all.iter().all(|a| a.perm(0).is_identity()));
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        assert_eq!(all.len(), 36);
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_alignments(8, 3, DEFAULT_ENUMERATION_CAP)
            .err()
            .unwrap();
        assert!(matches!(err, Error::StateSpaceTooLarge { .. }));
        assert!(enumerate_alignments(40, 3, u64::MAX).is_err());
        assert!(enumerate_alignments(4, 2, 23).is_err());
        assert!(enumerate_alignments(4, 2, 24).is_ok());
    }

    #[test]
    fn validation() {
        let id = Permutation::identity(3);
        let t = Permutation::from_one_based(&[2, 1, 3]).unwrap();
        assert!(Alignment::new(vec![t.clone(), id.clone()]).is_err());
        assert!(Alignment::new(vec![id.clone()]).is_err());
        assert!(Alignment::new(vec![id.clone(), Permutation::identity(4)]).is_err());
        assert!(Alignment::new(vec![id, t]).is_ok());
    }

    #[test]
    fn compact_round_trip() {
        let a = Alignment::parse_compact("[1 2 3];[3 1 2];[2 1 3]").unwrap();
        assert_eq!(a.to_compact_string(), "[1 2 3];[3 1 2];[2 1 3]");
        assert!(Alignment::parse_compact("[2 1 3];[1 2 3]").is_err());
    }
}
