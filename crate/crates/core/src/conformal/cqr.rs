use serde::{Deserialize, Serialize};

use super::{check_alpha, fold, training_rows, RegionPredictor};
use crate::data::{Dataset, SplitPlan};
use crate::error::Result;
use crate::region::{Interval, PredictionRegion};
use crate::regress::{QuantileConfig, QuantileEstimator};
use crate::scores::ScoreVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqrConfig {
    pub quantile: QuantileConfig,
    /// Lower and upper quantile levels; `(α/2, 1 − α/2)` when unset.
    pub levels: Option<(f64, f64)>,
}

impl Default for CqrConfig {
    fn default() -> Self {
        Self {
            quantile: QuantileConfig::KnnQuantile { k: 50 },
            levels: None,
        }
    }
}

/// Conformalized quantile regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cqr {
    pub low: QuantileEstimator,
    pub high: QuantileEstimator,
    pub scores: ScoreVector,
    /// `Q_{1−α}` of the calibration scores; may be negative.
    pub correction: f64,
    pub alpha: f64,
}

pub fn fit_cqr(data: &Dataset, plan: &SplitPlan, alpha: f64, config: &CqrConfig) -> Result<Cqr> {
    check_alpha(alpha)?;
    let train = fold(data, &training_rows(plan), "training")?;
    let cal = fold(data, &plan.idx_cal, "calibration")?;
    let (lo, hi) = config.levels.unwrap_or((alpha / 2.0, 1.0 - alpha / 2.0));
    let low = QuantileEstimator::fit(&train, lo, &config.quantile)?;
    let high = QuantileEstimator::fit(&train, hi, &config.quantile)?;
    Cqr::calibrate(low, high, &cal, alpha)
}

impl Cqr {
    /// Scores `max(t̂_low − Y, Y − t̂_high)`; correction is their
    /// `⌈(1−α)(n+1)⌉`-th order statistic.
    pub fn calibrate(
        low: QuantileEstimator,
        high: QuantileEstimator,
        cal: &Dataset,
        alpha: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let v = cal
            .rows()
            .zip(cal.y())
            .map(|(x, y)| Ok((low.predict(x)? - y).max(y - high.predict(x)?)))
            .collect::<Result<Vec<f64>>>()?;
        let scores = ScoreVector::new(v)?;
        let correction = scores.upper_quantile(1.0 - alpha);
        Ok(Self {
            low,
            high,
            scores,
            correction,
            alpha,
        })
    }
}

impl RegionPredictor for Cqr {
    fn predict_region(&self, x: &[f64]) -> Result<PredictionRegion> {
        let lo = self.low.predict(x)? - self.correction;
        let hi = self.high.predict(x)? + self.correction;
        if lo > hi {
            return Ok(PredictionRegion::empty());
        }
        PredictionRegion::union([Interval::new(lo, hi)])
    }
}
