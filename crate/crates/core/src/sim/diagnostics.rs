use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{fit_method, Method, RepReport};
use super::scenario::{oracle_hpd, Scenario, ScenarioKind};
use crate::conformal::RegionPredictor;
use crate::error::{Error, Result};
use crate::region::hausdorff;

/// Coverage within one group of test points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCoverage {
    pub label: String,
    pub n: usize,
    pub coverage: f64,
    /// Binomial standard error.
    pub se: f64,
}

/// Pools the test points of all successful `reports` and groups them by
/// `slicer(x)`; groups come back sorted by label.
pub fn conditional_coverage<'a>(
    reports: impl IntoIterator<Item = &'a RepReport>,
    slicer: impl Fn(&[f64]) -> String,
) -> Vec<GroupCoverage> {
    let mut groups: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for p in reports
        .into_iter()
        .filter(|r| !r.failed())
        .flat_map(|r| &r.points)
    {
        let g = groups.entry(slicer(&p.x)).or_default();
        g.0 += 1;
        g.1 += usize::from(p.covered);
    }
    groups
        .into_iter()
        .map(|(label, (n, hit))| {
            let c = hit as f64 / n as f64;
            GroupCoverage {
                label,
                n,
                coverage: c,
                se: (c * (1.0 - c) / n as f64).sqrt(),
            }
        })
        .collect()
}

/// Median Hausdorff distance to the oracle at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffPoint {
    pub n: usize,
    pub median: f64,
    /// Replication × covariate pairs that entered the median.
    pub count: usize,
    /// Pairs skipped because the fit failed or the region was empty or
    /// unbounded.
    pub skipped: usize,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// For each observed-sample size in `sizes`, fits `method` in `reps`
/// replications and records the median of `d_H(Ĉ(x), C*(x))` over the
/// replications and `x_grid`. Replication `r` at the `i`-th size uses seed
/// `seed + i·reps + r`.
pub fn hausdorff_diagnostic(
    kind: ScenarioKind,
    method: Method,
    sizes: &[usize],
    reps: usize,
    alpha: f64,
    seed: u64,
    x_grid: &[f64],
) -> Result<Vec<HausdorffPoint>> {
    if x_grid.is_empty() || reps == 0 {
        return Err(Error::InvalidParameter(
            "need at least one replication and one covariate".into(),
        ));
    }
    let oracles: Vec<_> = x_grid.iter().map(|&x| oracle_hpd(kind, x, alpha)).collect();
    sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let per_rep: Vec<Vec<Option<f64>>> = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let scn = Scenario {
                        kind,
                        n_obs: n,
                        n_test: 0,
                        alpha,
                        seed: seed + (i * reps) as u64 + r,
                    };
                    scn.validate()?;
                    let data = scn.generate().0;
                    let fitted =
                        match fit_method(method, &data, alpha, kind.uses_scale_model(), Some(kind))
                        {
                            Ok(f) => f,
                            Err(_) => return Ok(vec![None; x_grid.len()]),
                        };
                    Ok(x_grid
                        .iter()
                        .zip(&oracles)
                        .map(|(&x, o)| {
                            fitted
                                .predict_region(&[x])
                                .ok()
                                .and_then(|r| hausdorff(&r, o).ok())
                        })
                        .collect())
                })
                .collect::<Result<_>>()?;
            let mut vals: Vec<f64> = per_rep
                .iter()
                .flatten()
                .filter_map(|v| v.filter(|d| d.is_finite()))
                .collect();
            let total = reps * x_grid.len();
            let count = vals.len();
            Ok(HausdorffPoint {
                n,
                median: median(&mut vals),
                count,
                skipped: total - count,
            })
        })
        .collect()
}
