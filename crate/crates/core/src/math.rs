//! Small numeric helpers shared across modules.

/// `ln(k!)` for `k = 0..=max`, by cumulative sums.
pub fn log_factorials(max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=max {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `C(k, 2)`.
#[inline]
pub fn choose2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// `ln Σ exp(x_i)`, summed left to right after shifting by the maximum.
/// Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_tables_agree() {
        let t = log_factorials(20);
        for (k, &v) in t.iter().enumerate() {
            assert!((v - ln_factorial(k)).abs() < 1e-12);
        }
        assert!((t[5] - 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lse_is_stable() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp(&[-1000.0, 0.0]);
        assert!(v.abs() < 1e-12);
    }
}
