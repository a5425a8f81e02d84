//! Prediction regions as finite unions of closed intervals on the response
//! axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval with lo > hi: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    fn distance_to(&self, z: f64) -> f64 {
        if z < self.lo {
            self.lo - z
        } else if z > self.hi {
            z - self.hi
        } else {
            0.0
        }
    }
}

impl From<(f64, f64)> for Interval {
    /// Unchecked; [`PredictionRegion::new`] validates.
    fn from((lo, hi): (f64, f64)) -> Self {
        Self { lo, hi }
    }
}

/// A finite union of closed intervals.
///
/// Regions built through [`PredictionRegion::union`] are coalesced: sorted
/// with `hi_j < lo_{j+1}`. [`PredictionRegion::new`] keeps the input as given
/// so that overlapping raw output can be represented before coalescing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionRegion {
    intervals: Vec<Interval>,
}

impl PredictionRegion {
    /// Wraps intervals without merging. Intervals with `lo > hi` or NaN
    /// endpoints are rejected.
    pub fn new<I: Into<Interval>>(intervals: impl IntoIterator<Item = I>) -> Result<Self> {
        let intervals: Vec<Interval> = intervals.into_iter().map(Into::into).collect();
        for iv in &intervals {
            if iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi {
                return Err(Error::InvalidParameter(format!(
                    "malformed interval [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(Self { intervals })
    }

    /// Builds the coalesced union of the given intervals.
    pub fn union<I: Into<Interval>>(intervals: impl IntoIterator<Item = I>) -> Result<Self> {
        Ok(Self::new(intervals)?.coalesce())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_coalesced(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0].hi < w[1].lo)
    }

    /// Sorted, pairwise-disjoint union with identical point membership.
    /// Touching closed intervals (`hi == lo`) are merged.
    pub fn coalesce(&self) -> Self {
        let mut sorted = self.intervals.clone();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
        for iv in sorted {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        Self { intervals: out }
    }

    /// Total length; `+inf` if any endpoint is unbounded. Meaningful for
    /// coalesced regions.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, y: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(y))
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|iv| iv.lo.is_finite() && iv.hi.is_finite())
    }

    /// Affine image `offset + scale * region` for `scale > 0`.
    pub fn affine(&self, offset: f64, scale: f64) -> Self {
        Self {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval::new(offset + scale * iv.lo, offset + scale * iv.hi))
                .collect(),
        }
    }

    /// Distance from `z` to the nearest point of the region.
    pub fn distance(&self, z: f64) -> f64 {
        // Coalesced intervals are sorted by both endpoints, so only the
        // neighbours of the insertion point matter.
        let idx = self.intervals.partition_point(|iv| iv.hi < z);
        let mut best = f64::INFINITY;
        if idx < self.intervals.len() {
            best = best.min(self.intervals[idx].distance_to(z));
        }
        if idx > 0 {
            best = best.min(self.intervals[idx - 1].distance_to(z));
        }
        best
    }

    /// Points of `self` at which `d(., other)` can attain its supremum:
    /// own endpoints and the midpoints of gaps of `other` that fall inside.
    fn sup_distance_to(&self, other: &Self) -> f64 {
        let gaps: Vec<f64> = other
            .intervals
            .windows(2)
            .map(|w| 0.5 * (w[0].hi + w[1].lo))
            .collect();
        let mut sup: f64 = 0.0;
        for iv in &self.intervals {
            sup = sup.max(other.distance(iv.lo)).max(other.distance(iv.hi));
            let start = gaps.partition_point(|&m| m < iv.lo);
            for &m in gaps[start..].iter().take_while(|&&m| m <= iv.hi) {
                sup = sup.max(other.distance(m));
            }
        }
        sup
    }
}

/// Exact Hausdorff distance between two finite unions of bounded intervals.
pub fn hausdorff(a: &PredictionRegion, b: &PredictionRegion) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if !a.is_bounded() || !b.is_bounded() {
        return Err(Error::UnboundedRegion);
    }
    let (a, b) = (a.coalesce(), b.coalesce());
    Ok(a.sup_distance_to(&b).max(b.sup_distance_to(&a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn region(iv: &[(f64, f64)]) -> PredictionRegion {
        PredictionRegion::new(iv.iter().copied()).unwrap()
    }

    fn brute_force_hausdorff(a: &PredictionRegion, b: &PredictionRegion, step: f64) -> f64 {
        let sup = |from: &PredictionRegion, to: &PredictionRegion| {
            let mut s: f64 = 0.0;
            for iv in from.intervals() {
                let n = ((iv.hi - iv.lo) / step).ceil() as usize;
                for k in 0..=n {
                    let z = (iv.lo + k as f64 * step).min(iv.hi);
                    let d = to
                        .intervals()
                        .iter()
                        .map(|t| t.distance_to(z))
                        .fold(f64::INFINITY, f64::min);
                    s = s.max(d);
                }
            }
            s
        };
        sup(a, b).max(sup(b, a))
    }

    #[test]
    fn coalesce_examples() {
        assert_eq!(
            region(&[(0.0, 2.0), (1.0, 3.0)]).coalesce(),
            region(&[(0.0, 3.0)])
        );
        assert_eq!(
            region(&[(0.0, 1.0), (2.0, 3.0)]).coalesce(),
            region(&[(0.0, 1.0), (2.0, 3.0)])
        );
        assert_eq!(
            region(&[(5.0, 6.0), (0.0, 1.0), (0.5, 2.0)]).coalesce(),
            region(&[(0.0, 2.0), (5.0, 6.0)])
        );
        assert_eq!(
            region(&[(0.0, 1.0), (1.0, 2.0)]).coalesce(),
            region(&[(0.0, 2.0)])
        );
    }

    #[test]
    fn length_examples() {
        assert_eq!(region(&[(0.0, 1.0), (2.0, 3.0)]).length(), 2.0);
        assert_eq!(PredictionRegion::empty().length(), 0.0);
        assert_eq!(region(&[(f64::NEG_INFINITY, 1.0)]).length(), f64::INFINITY);
    }

    #[test]
    fn contains_examples() {
        let unit = region(&[(0.0, 1.0)]);
        assert!(unit.contains(0.5));
        assert!(unit.contains(1.0));
        assert!(unit.contains(0.0));
        assert!(!region(&[(0.0, 1.0), (2.0, 3.0)]).contains(1.5));
        assert!(!PredictionRegion::empty().contains(0.0));
    }

    #[test]
    fn malformed_interval_rejected() {
        assert!(PredictionRegion::new([(1.0, 0.0)]).is_err());
        assert!(PredictionRegion::new([(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let unit = region(&[(0.0, 1.0)]);
        assert_eq!(hausdorff(&unit, &unit).unwrap(), 0.0);
        assert_eq!(hausdorff(&unit, &region(&[(2.0, 3.0)])).unwrap(), 2.0);

        let a = region(&[(0.0, 1.0), (4.0, 5.0)]);
        let b = region(&[(0.0, 5.0)]);
        let oracle = brute_force_hausdorff(&a, &b, 1e-4);
        // worst point of b is the gap midpoint 2.5, at distance 1.5
        assert!((oracle - 1.5).abs() < 1e-4);
        assert!((hausdorff(&a, &b).unwrap() - oracle).abs() < 1e-4);
    }

    #[test]
    fn hausdorff_errors() {
        let unit = region(&[(0.0, 1.0)]);
        assert_eq!(
            hausdorff(&unit, &PredictionRegion::empty()),
            Err(Error::EmptyRegion)
        );
        assert_eq!(
            hausdorff(&unit, &region(&[(0.0, f64::INFINITY)])),
            Err(Error::UnboundedRegion)
        );
    }

    fn arb_region() -> impl Strategy<Value = PredictionRegion> {
        prop::collection::vec((-10.0f64..10.0, 0.0f64..3.0), 1..6)
            .prop_map(|v| PredictionRegion::new(v.into_iter().map(|(lo, w)| (lo, lo + w))).unwrap())
    }

    proptest! {
        #[test]
        fn coalesce_idempotent_and_preserves_membership(
            r in arb_region(),
            probes in prop::collection::vec(-15.0f64..15.0, 1000),
        ) {
            let c = r.coalesce();
            prop_assert!(c.is_coalesced());
            prop_assert_eq!(c.coalesce(), c.clone());
            for z in probes {
                prop_assert_eq!(r.contains(z), c.contains(z));
            }
            for iv in r.intervals() {
                prop_assert!(c.contains(iv.lo) && c.contains(iv.hi));
            }
            let raw: f64 = r.intervals().iter().map(Interval::length).sum();
            prop_assert!(c.length() <= raw + 1e-12);
        }

        #[test]
        fn hausdorff_metric_axioms(a in arb_region(), b in arb_region(), c in arb_region()) {
            let ab = hausdorff(&a, &b).unwrap();
            let ba = hausdorff(&b, &a).unwrap();
            let ac = hausdorff(&a, &c).unwrap();
            let bc = hausdorff(&b, &c).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
            if ab == 0.0 {
                prop_assert_eq!(a.coalesce(), b.coalesce());
            }
        }

        #[test]
        fn hausdorff_matches_grid(a in arb_region(), b in arb_region()) {
            let exact = hausdorff(&a, &b).unwrap();
            let grid = brute_force_hausdorff(&a.coalesce(), &b.coalesce(), 1e-3);
            prop_assert!(exact >= grid - 1e-9);
            prop_assert!(exact - grid < 1e-3);
        }
    }
}
