//! Calibration scores and the conformal order statistics taken from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calibration nonconformity scores with a cached sorted copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoScores);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter("NaN score".into()));
        }
        let mut sorted = values.clone();
        // stable: ties keep their calibration order
        sorted.sort_by(f64::total_cmp);
        Ok(Self { values, sorted })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// k-th smallest score (1-based) with clamping: `k < 1` is `-inf`,
    /// `k > n` is `+inf`.
    pub fn order_statistic(&self, k: i64) -> f64 {
        if k < 1 {
            f64::NEG_INFINITY
        } else if k as usize > self.sorted.len() {
            f64::INFINITY
        } else {
            self.sorted[k as usize - 1]
        }
    }

    /// `⌈δ(n+1)⌉`-th smallest score.
    pub fn upper_quantile(&self, delta: f64) -> f64 {
        self.order_statistic(ceil_index(delta * (self.len() as f64 + 1.0)))
    }

    /// `⌈δ(n+1) − 1⌉`-th smallest score.
    pub fn lower_quantile(&self, delta: f64) -> f64 {
        self.order_statistic(ceil_index(delta * (self.len() as f64 + 1.0) - 1.0))
    }
}

/// Ceiling that treats values within rounding noise of an integer as that
/// integer, so that e.g. `0.95 * 20` maps to 19 rather than 20.
fn ceil_index(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as i64
    } else {
        x.ceil() as i64
    }
}

/// Conformal upper quantile `Q_δ(V)`.
pub fn conformal_q(v: &ScoreVector, delta: f64) -> Result<f64> {
    check_level(delta)?;
    Ok(v.upper_quantile(delta))
}

/// Conformal lower quantile `R_δ(V)`.
pub fn conformal_r(v: &ScoreVector, delta: f64) -> Result<f64> {
    check_level(delta)?;
    Ok(v.lower_quantile(delta))
}

fn check_level(delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "quantile level {delta} outside [0, 1]"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(n: usize) -> ScoreVector {
        ScoreVector::new((1..=n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn upper_quantile_examples() {
        let v = seq(9);
        assert_eq!(conformal_q(&v, 0.9).unwrap(), 9.0);
        assert_eq!(conformal_q(&v, 0.5).unwrap(), 5.0);
        assert_eq!(conformal_q(&v, 0.99).unwrap(), f64::INFINITY);
    }

    #[test]
    fn lower_quantile_examples() {
        assert_eq!(conformal_r(&seq(9), 0.3).unwrap(), 2.0);
        assert_eq!(conformal_r(&seq(99), 0.05).unwrap(), 4.0);
        assert_eq!(conformal_r(&seq(9), 0.05).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_scores_rejected() {
        assert_eq!(ScoreVector::new(vec![]), Err(Error::NoScores));
    }

    #[test]
    fn integer_products_are_not_bumped() {
        // 0.95 * 20 is 19 up to rounding
        assert_eq!(conformal_q(&seq(19), 0.95).unwrap(), 19.0);
        assert_eq!(conformal_q(&seq(99), 0.95).unwrap(), 95.0);
    }

    #[test]
    fn order_is_positional_under_ties() {
        let v = ScoreVector::new(vec![2.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(v.sorted(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(v.order_statistic(3), 2.0);
    }

    proptest! {
        #[test]
        fn monotone_in_level(
            scores in prop::collection::vec(-100.0f64..100.0, 1..60),
            d1 in 0.0f64..=1.0,
            d2 in 0.0f64..=1.0,
        ) {
            let v = ScoreVector::new(scores).unwrap();
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(conformal_q(&v, lo).unwrap() <= conformal_q(&v, hi).unwrap());
            prop_assert!(conformal_r(&v, lo).unwrap() <= conformal_r(&v, hi).unwrap());
            prop_assert!(conformal_r(&v, d1).unwrap() <= conformal_q(&v, d1).unwrap());
        }

        #[test]
        fn sorted_cache_is_permutation(scores in prop::collection::vec(-100.0f64..100.0, 1..60)) {
            let v = ScoreVector::new(scores.clone()).unwrap();
            prop_assert!(v.sorted().windows(2).all(|w| w[0] <= w[1]));
            let mut a = scores;
            a.sort_by(f64::total_cmp);
            prop_assert_eq!(a, v.sorted().to_vec());
        }
    }
}
