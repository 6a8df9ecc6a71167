//! The coupling matrix `M_σ` on (edge, graph) pairs and the identity
//! `Tr(M_σ²) = Σ_{i≠j} (C(n,2) − D_ij(σ))`.

use serde::Serialize;

use crate::alignment::Alignment;
use crate::edge::EdgeIndex;
use crate::error::{Error, Result};
use crate::math::choose2;
use crate::metrics::{dij_matrix, edge_fixed_points, sigma_ij};
use crate::perm::Permutation;

pub const MAX_TRACE_N: usize = 12;

/// Dense `M_σ` with row/column `(e, i) ↦ i·C(n,2) + e`:
/// `M[(e,i),(e′,j)] = 1` iff `i ≠ j`, `e′ = σ_ij(e)` and `e′ ≠ e`.
pub fn coupling_matrix(sigma: &Alignment, truth: &Alignment) -> Result<Vec<Vec<u8>>> {
    sigma.same_shape(truth)?;
    let n = sigma.n();
    if n > MAX_TRACE_N {
        return Err(Error::SizeCap {
            what: "n for a dense coupling matrix",
            size: n,
            cap: MAX_TRACE_N,
        });
    }
    let index = EdgeIndex::new(n);
    let (p, edges) = (sigma.p(), index.len());
    let mut m = vec![vec![0u8; p * edges]; p * edges];
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let s = sigma_ij(sigma, truth, i, j);
            for e in 0..edges {
                let f = index.permute(&s, e);
                if f != e {
                    m[i * edges + e][j * edges + f] = 1;
                }
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceCheck {
    /// `Tr(M_σ²)` from the materialised matrix.
    pub lhs: u64,
    /// `Σ_{i≠j} (C(n,2) − D_ij)`.
    pub rhs: u64,
    pub ok: bool,
    /// `Tr((Σ_ρ M_σ)²)` where `Σ_ρ` has unit diagonal and `ρ` between
    /// distinct graphs on the same edge; present when `ρ` is given.
    pub weighted: Option<f64>,
}

fn trace_of_square(m: &[Vec<u8>]) -> u64 {
    let k = m.len();
    let mut total = 0u64;
    for a in 0..k {
        for b in 0..k {
            total += u64::from(m[a][b]) * u64::from(m[b][a]);
        }
    }
    total
}

fn weighted_trace(m: &[Vec<u8>], p: usize, edges: usize, rho: f64) -> f64 {
    let k = m.len();
    // (Σ_ρ M)[a][b] = Σ_c Σ_ρ[a][c] M[c][b]; Σ_ρ only couples equal edges.
    let mut sm = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        let e = a % edges;
        for g in 0..p {
            let c = g * edges + e;
            let w = if c == a { 1.0 } else { rho };
            for b in 0..k {
                if m[c][b] != 0 {
                    sm[a][b] += w;
                }
            }
        }
    }
    let mut total = 0.0;
    for a in 0..k {
        for b in 0..k {
            total += sm[a][b] * sm[b][a];
        }
    }
    total
}

pub fn trace_identity_check(sigma: &Alignment, truth: &Alignment, rho: Option<f64>) -> Result<TraceCheck> {
    let m = coupling_matrix(sigma, truth)?;
    let lhs = trace_of_square(&m);
    let edges = choose2(sigma.n());
    let big_d = edge_fixed_points(sigma, truth)?;
    let p = sigma.p();
    let mut rhs = 0u64;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                rhs += (edges - big_d[i][j]) as u64;
            }
        }
    }
    Ok(TraceCheck {
        lhs,
        rhs,
        ok: lhs == rhs,
        weighted: rho.map(|r| weighted_trace(&m, p, edges, r)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeFixedPointCheck {
    pub d: usize,
    pub big_d: usize,
    /// `D − C(d, 2)`.
    pub excess: i64,
    /// `(n − d) / 2`.
    pub upper: f64,
    pub ok: bool,
}

/// `0 ≤ D − C(d,2) ≤ (n − d)/2` for a single permutation, with `d` its fixed
/// points and `D` its fixed edges.
pub fn edge_fixed_point_bounds(tau: &Permutation) -> EdgeFixedPointCheck {
    let n = tau.len();
    let index = EdgeIndex::new(n);
    let d = tau.fixed_points();
    let big_d = crate::metrics::fixed_edges(tau, &index);
    let excess = big_d as i64 - choose2(d) as i64;
    let upper = (n - d) as f64 / 2.0;
    EdgeFixedPointCheck {
        d,
        big_d,
        excess,
        upper,
        ok: excess >= 0 && excess as f64 <= upper,
    }
}

/// The same bounds for every pair `i < j` of an alignment.
pub fn edge_fixed_point_bounds_pairwise(sigma: &Alignment, truth: &Alignment) -> Result<Vec<EdgeFixedPointCheck>> {
    let d = dij_matrix(sigma, truth)?;
    let p = sigma.p();
    let mut out = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let check = edge_fixed_point_bounds(&sigma_ij(sigma, truth, i, j));
            debug_assert_eq!(check.d, d[i][j]);
            out.push(check);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::all_permutations;
    use crate::rng::seeded_rng;

    #[test]
    fn truth_gives_zero() {
        let mut rng = seeded_rng(1);
        let t = Alignment::random(5, 3, &mut rng);
        let c = trace_identity_check(&t, &t, Some(0.5)).unwrap();
        assert_eq!((c.lhs, c.rhs, c.ok), (0, 0, true));
        assert_eq!(c.weighted, Some(0.0));
    }

    #[test]
    fn transposition_case() {
        let t = Alignment::identity(5, 2);
        let s = Alignment::new(vec![Permutation::identity(5), Permutation::transposition(5, 0, 1)]).unwrap();
        let c = trace_identity_check(&s, &t, None).unwrap();
        // A transposition fixes 4 of the 10 edges of K5.
        assert_eq!(c.rhs, 2 * (10 - 4));
        assert!(c.ok);
    }

    #[test]
    fn random_instances() {
        let mut rng = seeded_rng(2);
        for _ in 0..20 {
            let t = Alignment::random(6, 3, &mut rng);
            let s = Alignment::random(6, 3, &mut rng);
            let c = trace_identity_check(&s, &t, Some(0.0)).unwrap();
            assert!(c.ok, "{c:?}");
            assert_eq!(c.weighted, Some(c.lhs as f64));
        }
    }

    #[test]
    fn exhaustive_bounds_small() {
        for n in 1..=5 {
            for tau in all_permutations(n) {
                assert!(edge_fixed_point_bounds(&tau).ok, "{tau}");
            }
        }
    }

    #[test]
    fn size_cap() {
        let a = Alignment::identity(13, 2);
        assert!(matches!(trace_identity_check(&a, &a, None), Err(Error::SizeCap { .. })));
    }
}
