//! Permutations of `⟦1, n⟧`.
//!
//! Storage is zero-based; the one-based view (`from_one_based`, `to_one_based`,
//! `Display`, serde) is what crosses the public boundary into files and the CLI.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// Builds from zero-based images, validating bijectivity.
    pub fn from_zero_based(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {} out of range for n = {n}",
                    x + 1
                )));
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidPermutation(format!(
                    "image {} appears twice",
                    x + 1
                )));
            }
        }
        Ok(Permutation { map })
    }

    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let map = images
            .iter()
            .map(|&x| {
                x.checked_sub(1).ok_or_else(|| {
                    Error::InvalidPermutation("images are one-based; got 0".to_string())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_zero_based(map)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|&x| x + 1).collect()
    }

    /// Transposition of the zero-based points `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.map.swap(a, b);
        p
    }

    /// Uniform permutation by Fisher–Yates on the supplied stream.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Image of the zero-based point `x`.
    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "compose: n = {} vs n = {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            map: other.map.iter().map(|&x| self.map[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    pub fn fixed_points(&self) -> usize {
        self.map.iter().enumerate().filter(|&(i, &x)| i == x).count()
    }

    /// Number of points where `self` and `other` agree.
    pub fn agreements(&self, other: &Permutation) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "agreements: n = {} vs n = {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .map
            .iter()
            .zip(&other.map)
            .filter(|(a, b)| a == b)
            .count())
    }

    pub(crate) fn swap_images(&mut self, a: usize, b: usize) {
        self.map.swap(a, b);
    }

    /// Rearranges into the lexicographically next permutation; `false` once the
    /// last one has been reached (the map is then reset to the identity).
    pub(crate) fn advance_lexicographic(&mut self) -> bool {
        let m = &mut self.map;
        let n = m.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && m[i - 1] >= m[i] {
            i -= 1;
        }
        if i == 0 {
            m.reverse();
            return false;
        }
        let mut j = n - 1;
        while m[j] <= m[i - 1] {
            j -= 1;
        }
        m.swap(i - 1, j);
        m[i..].reverse();
        true
    }
}

/// One-line notation, one-based, space separated: `[2 1 3]`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, x) in self.map.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", x + 1)?;
        }
        write!(f, "]")
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::from_one_based(&images).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn compose_with_identity() {
        let mut rng = seeded_rng(3);
        let b = Permutation::random(7, &mut rng);
        assert_eq!(Permutation::identity(7).compose(&b).unwrap(), b);
    }

    #[test]
    fn three_cycle_inverse() {
        let c = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        assert_eq!(c.inverse(), Permutation::from_one_based(&[3, 1, 2]).unwrap());
    }

    #[test]
    fn compose_inverse_is_identity() {
        let mut rng = seeded_rng(11);
        for _ in 0..100 {
            let a = Permutation::random(10, &mut rng);
            assert!(a.compose(&a.inverse()).unwrap().is_identity());
            assert!(a.inverse().compose(&a).unwrap().is_identity());
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Permutation::from_one_based(&[1, 1, 2]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
        assert!(Permutation::from_one_based(&[1, 4, 2]).is_err());
        let a = Permutation::identity(3);
        let b = Permutation::identity(4);
        assert!(matches!(a.compose(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn lexicographic_walk_visits_all() {
        let mut p = Permutation::identity(4);
        let mut count = 1;
        let mut prev = p.clone();
        while p.advance_lexicographic() {
            assert!(p > prev);
            prev = p.clone();
            count += 1;
        }
        assert_eq!(count, 24);
        assert!(p.is_identity());
    }

    #[test]
    fn display_and_serde_are_one_based() {
        let p = Permutation::from_one_based(&[2, 1, 3]).unwrap();
        assert_eq!(p.to_string(), "[2 1 3]");
        assert_eq!(p.apply(0), 1);
    }
}
