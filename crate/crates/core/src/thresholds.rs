//! Exponent thresholds for the restriction problem in dimension one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `2 / alpha`: below this no restriction estimate can hold.
pub fn p_necessary(alpha: f64) -> f64 {
    2.0 / alpha
}

/// `4 / alpha - 2`: the estimate fails for `f_ell` whenever `p` is smaller.
pub fn p_sharp(alpha: f64) -> f64 {
    4.0 / alpha - 2.0
}

/// `2 (2 - 2 alpha + beta) / beta`, the Mockenhaupt-Mitsis-Bak-Seeger exponent.
pub fn p_mock(alpha: f64, beta: f64) -> f64 {
    2.0 * (2.0 - 2.0 * alpha + beta) / beta
}

/// `q (2 - alpha) / (alpha (q - 1))`: the `L^q -> L^p` estimate fails below it.
pub fn pq_bound(alpha: f64, q: f64) -> Result<f64> {
    if q <= 1.0 {
        return Err(Error::InvalidParams(format!("q = {q} must exceed 1")));
    }
    Ok(q * (2.0 - alpha) / (alpha * (q - 1.0)))
}

/// Limit of [`pq_bound`] as `q -> infinity`.
pub fn pq_limit(alpha: f64) -> f64 {
    (2.0 - alpha) / alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub alpha: f64,
    pub p_necessary: f64,
    pub p_sharp: f64,
    pub p_mock_at_alpha: f64,
    pub pq_limit: f64,
}

impl Thresholds {
    pub fn new(alpha: f64) -> Self {
        Thresholds {
            alpha,
            p_necessary: p_necessary(alpha),
            p_sharp: p_sharp(alpha),
            p_mock_at_alpha: p_mock(alpha, alpha),
            pq_limit: pq_limit(alpha),
        }
    }

    /// `1 <= p < 4/alpha - 2`.
    pub fn in_failing_range(&self, p: f64) -> bool {
        (1.0..self.p_sharp).contains(&p)
    }

    /// Whether `(p, q)` lies where the `L^q` estimate fails.
    pub fn in_pq_failing_region(&self, p: f64, q: f64) -> bool {
        match pq_bound(self.alpha, q) {
            Ok(bound) => p >= 1.0 && p < bound,
            Err(_) => false,
        }
    }
}

/// Checks that `p_mock(alpha, .)` is strictly decreasing along `betas`.
pub fn p_mock_decreasing(alpha: f64, betas: &[f64]) -> bool {
    let mut sorted = betas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .all(|w| w[0] == w[1] || p_mock(alpha, w[1]) < p_mock(alpha, w[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_dimension_values() {
        let th = Thresholds::new(0.5);
        assert_eq!(th.p_necessary, 4.0);
        assert_eq!(th.p_sharp, 6.0);
        assert_eq!(p_mock(0.5, 0.5), 6.0);
        assert_eq!(th.pq_limit, 3.0);
        assert_eq!(pq_bound(0.5, 2.0).unwrap(), 6.0);
        assert!(pq_bound(0.5, 1.0).is_err());
    }

    #[test]
    fn mock_meets_sharp_at_beta_alpha() {
        for i in 1..20 {
            let a = i as f64 / 20.0;
            assert!((p_mock(a, a) - p_sharp(a)).abs() < 1e-12);
        }
    }

    #[test]
    fn mock_is_decreasing() {
        let betas: Vec<f64> = (1..=50).map(|i| i as f64 / 100.0).collect();
        assert!(p_mock_decreasing(0.5, &betas));
    }

    #[test]
    fn pq_bound_decreases_to_limit() {
        let mut last = f64::INFINITY;
        for q in [1.5, 2.0, 4.0, 16.0, 1e6] {
            let b = pq_bound(0.5, q).unwrap();
            assert!(b < last && b > pq_limit(0.5));
            last = b;
        }
    }

    #[test]
    fn failing_range() {
        let th = Thresholds::new(0.5);
        assert!(th.in_failing_range(5.9));
        assert!(!th.in_failing_range(6.0));
        assert!(th.in_pq_failing_region(5.0, 2.0));
        assert!(!th.in_pq_failing_region(7.0, 2.0));
    }
}
