use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::knn::KnnIndex;
use super::ols::design;
use super::{check_dim, check_rows, FeatureMap, LinearFit};
use crate::data::Dataset;
use crate::error::{Error, Result};

const PINBALL_ITERATIONS: usize = 60;
const IRLS_EPS: f64 = 1e-6;
const IRLS_TOL: f64 = 1e-9;

/// Linear-interpolation sample quantile of sorted data (R type 7).
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// How to fit a conditional quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum QuantileConfig {
    /// Empirical quantile of the responses of the `k` nearest rows.
    KnnQuantile { k: usize },
    /// Pinball-loss linear quantile regression over a feature map.
    LinearQuantile { features: FeatureMap },
}

impl QuantileConfig {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            QuantileConfig::KnnQuantile { k } => {
                if *k == 0 {
                    return Err(Error::InvalidParameter("k must be positive".into()));
                }
                check_rows((*k).max(10), n)
            }
            QuantileConfig::LinearQuantile { .. } => Ok(()),
        }
    }
}

/// Fitted estimator of one conditional quantile level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum QuantileEstimator {
    Knn {
        index: KnnIndex,
        k: usize,
        level: f64,
    },
    Linear {
        fit: LinearFit,
        level: f64,
    },
    Constant {
        value: f64,
        dim: usize,
    },
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level {level} outside (0, 1)"
        )));
    }
    Ok(())
}

impl QuantileEstimator {
    pub fn fit(data: &Dataset, level: f64, config: &QuantileConfig) -> Result<Self> {
        check_level(level)?;
        config.validate(data.len())?;
        match config {
            QuantileConfig::KnnQuantile { k } => Ok(Self::Knn {
                index: KnnIndex::new(data, data.y().to_vec()),
                k: *k,
                level,
            }),
            QuantileConfig::LinearQuantile { features } => Ok(Self::Linear {
                fit: fit_pinball(data, features, level)?,
                level,
            }),
        }
    }

    /// A quantile that does not depend on the covariates.
    pub fn fixed(value: f64, dim: usize) -> Self {
        Self::Constant { value, dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Knn { index, .. } => index.dim(),
            Self::Linear { fit, .. } => fit.dim(),
            Self::Constant { dim, .. } => *dim,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(match self {
            Self::Knn { index, k, level } => {
                empirical_quantile(&index.neighbor_targets(x, *k), *level)
            }
            Self::Linear { fit, .. } => fit.predict_unchecked(x),
            Self::Constant { value, .. } => *value,
        })
    }
}

/// Linear quantile regression minimising the pinball loss by iteratively
/// reweighted least squares (weights `ρ_τ(r)/r²`, residuals floored at a
/// small multiple of the residual scale). Features are standardized
/// internally; the start point is the OLS fit with its intercept moved to
/// the `level` quantile of the OLS residuals, and the iterate with the
/// lowest pinball loss is returned.
///
/// The standardized design and OLS residuals are prepared once and shared by
/// every level of a ladder.
struct PinballProblem<'a> {
    features: &'a FeatureMap,
    dim: usize,
    y: &'a [f64],
    /// Row-major standardized design with a leading column of ones.
    z: Vec<f64>,
    p: usize,
    center: Vec<f64>,
    spread: Vec<f64>,
    /// OLS coefficients in standardized units.
    beta_ols: Vec<f64>,
    sorted_resid: Vec<f64>,
    /// Robust residual scale, for tolerances.
    scale: f64,
}

impl<'a> PinballProblem<'a> {
    fn new(data: &'a Dataset, features: &'a FeatureMap) -> Result<Self> {
        let ols = LinearFit::fit(data, data.y(), features)?;
        let x = design(data, features);
        let (n, p) = (x.nrows(), x.ncols());
        let mut center = vec![0.0; p];
        let mut spread = vec![1.0; p];
        for j in 1..p {
            let col = x.column(j);
            let m = col.mean();
            let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
            if sd == 0.0 {
                return Err(Error::SingularDesign);
            }
            center[j] = m;
            spread[j] = sd;
        }
        let mut z = Vec::with_capacity(n * p);
        for i in 0..n {
            z.push(1.0);
            for j in 1..p {
                z.push((x[(i, j)] - center[j]) / spread[j]);
            }
        }
        let y = data.y();
        let b = ols.coefficients();
        let mut beta_ols = vec![0.0; p];
        beta_ols[0] = b[0] + (1..p).map(|j| b[j] * center[j]).sum::<f64>();
        for j in 1..p {
            beta_ols[j] = b[j] * spread[j];
        }
        let mut sorted_resid: Vec<f64> = (0..n)
            .map(|i| y[i] - dot(&z[i * p..(i + 1) * p], &beta_ols))
            .collect();
        sorted_resid.sort_by(f64::total_cmp);
        let iqr = empirical_quantile(&sorted_resid, 0.75) - empirical_quantile(&sorted_resid, 0.25);
        let scale = if iqr > 0.0 { iqr / 1.349 } else { 1.0 };
        Ok(Self {
            features,
            dim: data.dim(),
            y,
            z,
            p,
            center,
            spread,
            beta_ols,
            sorted_resid,
            scale,
        })
    }

    fn loss(&self, beta: &[f64], level: f64) -> f64 {
        let p = self.p;
        self.y
            .iter()
            .enumerate()
            .map(|(i, &yi)| {
                let r = yi - dot(&self.z[i * p..(i + 1) * p], beta);
                if r < 0.0 {
                    (level - 1.0) * r
                } else {
                    level * r
                }
            })
            .sum()
    }

    fn solve(&self, level: f64) -> LinearFit {
        let (p, z, y) = (self.p, &self.z, self.y);
        let eps = IRLS_EPS * self.scale;
        let mut beta = self.beta_ols.clone();
        beta[0] += empirical_quantile(&self.sorted_resid, level);
        let mut best_loss = self.loss(&beta, level);
        let mut best = beta.clone();
        for _ in 0..PINBALL_ITERATIONS {
            // weighted least squares with weights ρ_τ(r) / r²
            let mut a = DMatrix::<f64>::zeros(p, p);
            let mut rhs = DVector::<f64>::zeros(p);
            for (i, &yi) in y.iter().enumerate() {
                let row = &z[i * p..(i + 1) * p];
                let r = yi - dot(row, &beta);
                let w = if r < 0.0 { 1.0 - level } else { level } / r.abs().max(eps);
                for j in 0..p {
                    rhs[j] += w * row[j] * yi;
                    for k in 0..=j {
                        a[(j, k)] += w * row[j] * row[k];
                    }
                }
            }
            for j in 0..p {
                for k in 0..j {
                    a[(k, j)] = a[(j, k)];
                }
            }
            let Some(next) = a.cholesky().map(|c| c.solve(&rhs)) else {
                break;
            };
            let delta = next
                .iter()
                .zip(&beta)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            beta.copy_from_slice(next.as_slice());
            let loss = self.loss(&beta, level);
            if loss < best_loss {
                best_loss = loss;
                best.copy_from_slice(&beta);
            }
            if delta < IRLS_TOL * self.scale {
                break;
            }
        }
        let mut coef = vec![0.0; p];
        coef[0] = best[0]
            - (1..p)
                .map(|j| best[j] * self.center[j] / self.spread[j])
                .sum::<f64>();
        for j in 1..p {
            coef[j] = best[j] / self.spread[j];
        }
        LinearFit::from_parts(self.features.clone(), self.dim, coef)
    }
}

fn fit_pinball(data: &Dataset, features: &FeatureMap, level: f64) -> Result<LinearFit> {
    Ok(PinballProblem::new(data, features)?.solve(level))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conditional quantile levels `0.01, 0.02, .., 0.99`.
pub const DEFAULT_LADDER_LEVELS: usize = 99;

fn default_levels() -> Vec<f64> {
    (1..=DEFAULT_LADDER_LEVELS)
        .map(|k| k as f64 / 100.0)
        .collect()
}

/// A monotone conditional quantile function at one covariate value, given
/// by knots `(level, value)` and linear interpolation between them.
///
/// The knot list is closed with `(0, v_first − w)` and `(1, v_last + w)`
/// where `w` is the width of the outermost segment, so that the implied CDF
/// reaches 0 and 1 at finite responses.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileLadder {
    levels: Vec<f64>,
    values: Vec<f64>,
}

impl QuantileLadder {
    /// `levels` must be strictly increasing inside `(0, 1)`. Values are
    /// monotonized by a running maximum.
    pub fn new(levels: &[f64], values: &[f64]) -> Result<Self> {
        if levels.len() != values.len() || levels.len() < 2 {
            return Err(Error::InvalidParameter(
                "ladder needs at least two matching knots".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] >= w[1])
            || levels[0] <= 0.0
            || levels[levels.len() - 1] >= 1.0
        {
            return Err(Error::InvalidParameter(
                "ladder levels must increase inside (0, 1)".into(),
            ));
        }
        let mut mono = Vec::with_capacity(values.len());
        let mut run = f64::NEG_INFINITY;
        for &v in values {
            run = run.max(v);
            mono.push(run);
        }
        let k = mono.len();
        let avg = (mono[k - 1] - mono[0]) / (k - 1) as f64;
        let w_lo = (mono[1] - mono[0]).max(avg);
        let w_hi = (mono[k - 1] - mono[k - 2]).max(avg);
        let mut lv = Vec::with_capacity(k + 2);
        let mut vv = Vec::with_capacity(k + 2);
        lv.push(0.0);
        vv.push(mono[0] - w_lo);
        lv.extend_from_slice(levels);
        vv.extend_from_slice(&mono);
        lv.push(1.0);
        vv.push(mono[k - 1] + w_hi);
        Ok(Self {
            levels: lv,
            values: vv,
        })
    }

    /// `F̂(y)`: nondecreasing, 0 below the first knot, 1 from the last.
    pub fn cdf(&self, y: f64) -> f64 {
        let last = self.values.len() - 1;
        if y < self.values[0] {
            return 0.0;
        }
        if y >= self.values[last] {
            return 1.0;
        }
        // last knot with value <= y
        let i = self.values.partition_point(|&v| v <= y) - 1;
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (l0, l1) = (self.levels[i], self.levels[i + 1]);
        l0 + (y - v0) / (v1 - v0) * (l1 - l0)
    }

    /// `inf {y : F̂(y) ≥ τ}`.
    pub fn quantile(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, 1.0);
        let i = self.levels.partition_point(|&l| l < tau);
        if i == 0 {
            return self.values[0];
        }
        let (l0, l1) = (self.levels[i - 1], self.levels[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (tau - l0) / (l1 - l0) * (v1 - v0)
    }

    /// `sup {y : F̂(y) ≤ τ}` for `τ < 1`.
    pub fn quantile_upper(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, 1.0);
        let last = self.levels.len() - 1;
        let i = self.levels.partition_point(|&l| l <= tau);
        if i > last {
            return self.values[last];
        }
        let (l0, l1) = (self.levels[i - 1], self.levels[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (tau - l0) / (l1 - l0) * (v1 - v0)
    }

    /// Lower tail level `z ∈ [0, α]` (grid step `step`) minimising the width
    /// `Q̂(z + 1 − α) − Q̂(z)`; the first minimiser wins ties.
    pub fn shortest_offset(&self, alpha: f64, step: f64) -> f64 {
        let n = (alpha / step).round() as usize;
        let mut best_z = 0.0;
        let mut best_w = f64::INFINITY;
        for k in 0..=n {
            let z = (k as f64 * step).min(alpha);
            let w = self.quantile(z + 1.0 - alpha) - self.quantile(z);
            if w < best_w {
                best_w = w;
                best_z = z;
            }
        }
        best_z
    }
}

/// Fitted ladder of conditional quantiles at fixed levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LadderEstimator {
    Knn {
        index: KnnIndex,
        k: usize,
        levels: Vec<f64>,
    },
    Linear {
        fits: Vec<LinearFit>,
        levels: Vec<f64>,
    },
    Constant {
        values: Vec<f64>,
        levels: Vec<f64>,
        dim: usize,
    },
}

impl LadderEstimator {
    /// Fits the default ladder `0.01..0.99`.
    pub fn fit(data: &Dataset, config: &QuantileConfig) -> Result<Self> {
        config.validate(data.len())?;
        let levels = default_levels();
        match config {
            QuantileConfig::KnnQuantile { k } => Ok(Self::Knn {
                index: KnnIndex::new(data, data.y().to_vec()),
                k: *k,
                levels,
            }),
            QuantileConfig::LinearQuantile { features } => {
                let problem = PinballProblem::new(data, features)?;
                let fits = levels.iter().map(|&l| problem.solve(l)).collect();
                Ok(Self::Linear { fits, levels })
            }
        }
    }

    /// Covariate-free ladder from known quantile values at the default levels.
    pub fn fixed(values: Vec<f64>, dim: usize) -> Result<Self> {
        if values.len() != DEFAULT_LADDER_LEVELS {
            return Err(Error::InvalidParameter(format!(
                "expected {DEFAULT_LADDER_LEVELS} ladder values, got {}",
                values.len()
            )));
        }
        Ok(Self::Constant {
            values,
            levels: default_levels(),
            dim,
        })
    }

    /// Same as [`LadderEstimator::fixed`] but evaluating a quantile function
    /// at the default levels.
    pub fn from_quantile_fn(q: impl Fn(f64) -> f64, dim: usize) -> Result<Self> {
        Self::fixed(default_levels().into_iter().map(q).collect(), dim)
    }

    pub fn levels(&self) -> &[f64] {
        match self {
            Self::Knn { levels, .. }
            | Self::Linear { levels, .. }
            | Self::Constant { levels, .. } => levels,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Knn { index, .. } => index.dim(),
            Self::Linear { fits, .. } => fits[0].dim(),
            Self::Constant { dim, .. } => *dim,
        }
    }

    pub fn ladder_at(&self, x: &[f64]) -> Result<QuantileLadder> {
        check_dim(self.dim(), x)?;
        match self {
            Self::Knn { index, k, levels } => {
                let t = index.neighbor_targets(x, *k);
                let values: Vec<f64> = levels.iter().map(|&l| empirical_quantile(&t, l)).collect();
                QuantileLadder::new(levels, &values)
            }
            Self::Linear { fits, levels } => {
                let values: Vec<f64> = fits.iter().map(|f| f.predict_unchecked(x)).collect();
                QuantileLadder::new(levels, &values)
            }
            Self::Constant { values, levels, .. } => QuantileLadder::new(levels, values),
        }
    }
}
