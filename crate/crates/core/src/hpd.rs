//! Highest-density level sets of a kernel density estimate.
//!
//! The smallest set holding `1 − α` of the KDE mass is a superlevel set
//! `{z : f̂(z) > λ̂}`. The cutoff is located by bisection on the sublevel
//! mass, the set is read off the cached grid as maximal runs, and each run is
//! described by its lower- and upper-tail masses so that conformal order
//! statistics can replace the KDE endpoints later.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::{KdeModel, GRID_SIZE};
use crate::region::Interval;

/// Level-set components with less KDE mass than this are discarded.
pub const SLIVER_MASS: f64 = 1e-3;
const ENDPOINT_BISECTIONS: usize = 20;
const CUTOFF_BRACKET_TOL: f64 = 1e-10;
const CUTOFF_MASS_TOL: f64 = 1e-6;

/// Tail masses `(α_j, β_j)` of one level-set interval `[l_j, u_j]`:
/// `α_j = F̂(l_j)` and `β_j = 1 − F̂(u_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPair {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpdResult {
    pub lambda_hat: f64,
    pub intervals: Vec<Interval>,
    pub quantile_pairs: Vec<TailPair>,
    pub alpha: f64,
    /// Components removed by the sliver filter.
    pub slivers_dropped: usize,
}

impl HpdResult {
    pub fn components(&self) -> usize {
        self.intervals.len()
    }
}

/// Sublevel mass `∫_{f̂ ≤ λ} f̂` evaluated on the cached grid by the
/// trapezoid rule, plus the exact KDE mass outside the grid.
pub struct SublevelMass<'a> {
    model: &'a KdeModel,
    outside: f64,
}

impl<'a> SublevelMass<'a> {
    pub fn new(model: &'a KdeModel) -> Self {
        let (lo, hi) = model.grid_span();
        Self {
            model,
            outside: model.cdf(lo) + (1.0 - model.cdf(hi)),
        }
    }

    pub fn at(&self, lambda: f64) -> f64 {
        let d = self.model.grid_density();
        let keep = |v: f64| if v <= lambda { v } else { 0.0 };
        let inner: f64 = d[1..GRID_SIZE - 1].iter().map(|&v| keep(v)).sum();
        let ends = 0.5 * (keep(d[0]) + keep(d[GRID_SIZE - 1]));
        self.outside + self.model.grid_step() * (inner + ends)
    }
}

fn max_density(model: &KdeModel) -> f64 {
    model.grid_density().iter().copied().fold(0.0, f64::max)
}

/// Density cutoff `λ̂` whose sublevel mass is closest to `alpha`.
pub fn find_cutoff(model: &KdeModel, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0, 1)"
        )));
    }
    let mass = SublevelMass::new(model);
    let (mut lo, mut hi) = (0.0, max_density(model));
    let mut best = (f64::INFINITY, 0.0);
    let mut consider = |lambda: f64| {
        let m = mass.at(lambda);
        let err = (m - alpha).abs();
        if err < best.0 {
            best = (err, lambda);
        }
        m
    };
    consider(lo);
    consider(hi);
    while hi - lo > CUTOFF_BRACKET_TOL {
        let mid = 0.5 * (lo + hi);
        let m = consider(mid);
        if (m - alpha).abs() < CUTOFF_MASS_TOL {
            break;
        }
        if m < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}

/// Maximal grid runs with `f̂ > λ̂`, endpoints refined by bisection on
/// `f̂(z) − λ̂` between the bracketing grid points.
pub fn extract_intervals(model: &KdeModel, lambda_hat: f64) -> Result<Vec<Interval>> {
    if !(lambda_hat >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "negative cutoff {lambda_hat}"
        )));
    }
    if lambda_hat >= max_density(model) {
        return Err(Error::EmptyHpdSet);
    }
    let d = model.grid_density();
    let above = |i: usize| d[i] > lambda_hat;
    let mut out = Vec::new();
    let mut i = 0;
    while i < GRID_SIZE {
        if !above(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < GRID_SIZE && above(i + 1) {
            i += 1;
        }
        let end = i;
        let lo = if start == 0 {
            model.grid_point(0)
        } else {
            refine(
                model,
                lambda_hat,
                model.grid_point(start - 1),
                model.grid_point(start),
            )
        };
        let hi = if end == GRID_SIZE - 1 {
            model.grid_point(end)
        } else {
            refine(
                model,
                lambda_hat,
                model.grid_point(end + 1),
                model.grid_point(end),
            )
        };
        out.push(Interval::new(lo.min(hi), hi.max(lo)));
        i += 1;
    }
    Ok(out)
}

/// Bisection between `outside` (f̂ ≤ λ) and `inside` (f̂ > λ).
fn refine(model: &KdeModel, lambda: f64, mut outside: f64, mut inside: f64) -> f64 {
    for _ in 0..ENDPOINT_BISECTIONS {
        let mid = 0.5 * (outside + inside);
        if model.density(mid) > lambda {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (outside + inside)
}

/// Tail masses `(F̂(l_j), 1 − F̂(u_j))` for each interval.
pub fn quantile_pairs(model: &KdeModel, intervals: &[Interval]) -> Vec<TailPair> {
    intervals
        .iter()
        .map(|iv| TailPair {
            lower: model.cdf(iv.lo),
            upper: 1.0 - model.cdf(iv.hi),
        })
        .collect()
}

/// Full level-set extraction: cutoff, intervals, sliver filter, tail pairs.
pub fn estimate_hpd(model: &KdeModel, alpha: f64) -> Result<HpdResult> {
    let lambda_hat = find_cutoff(model, alpha)?;
    let raw = extract_intervals(model, lambda_hat)?;
    let n_raw = raw.len();
    let intervals: Vec<Interval> = raw
        .into_iter()
        .filter(|iv| model.cdf(iv.hi) - model.cdf(iv.lo) >= SLIVER_MASS)
        .collect();
    if intervals.is_empty() {
        return Err(Error::EmptyHpdSet);
    }
    let quantile_pairs = quantile_pairs(model, &intervals);
    Ok(HpdResult {
        lambda_hat,
        slivers_dropped: n_raw - intervals.len(),
        intervals,
        quantile_pairs,
        alpha,
    })
}
