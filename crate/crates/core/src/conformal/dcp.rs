use serde::{Deserialize, Serialize};

use super::{check_alpha, fold, training_rows, RegionPredictor};
use crate::data::{Dataset, SplitPlan};
use crate::error::Result;
use crate::region::{Interval, PredictionRegion};
use crate::regress::{FeatureMap, LadderEstimator, QuantileConfig, QuantileLadder};
use crate::scores::ScoreVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcpConfig {
    pub quantile: QuantileConfig,
    /// Grid step for the lower-tail offset search over `[0, α]`.
    pub offset_step: f64,
}

impl Default for DcpConfig {
    fn default() -> Self {
        Self {
            quantile: QuantileConfig::LinearQuantile {
                features: FeatureMap::quadratic(),
            },
            offset_step: 0.005,
        }
    }
}

/// Distributional conformal prediction with the shortest-interval offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dcp {
    pub ladder: LadderEstimator,
    pub scores: ScoreVector,
    pub threshold: f64,
    pub alpha: f64,
    pub offset_step: f64,
}

pub fn fit_dcp(data: &Dataset, plan: &SplitPlan, alpha: f64, config: &DcpConfig) -> Result<Dcp> {
    check_alpha(alpha)?;
    let train = fold(data, &training_rows(plan), "training")?;
    let cal = fold(data, &plan.idx_cal, "calibration")?;
    let ladder = LadderEstimator::fit(&train, &config.quantile)?;
    Dcp::calibrate(ladder, &cal, alpha, config.offset_step)
}

impl Dcp {
    /// Scores `|F̂(Y, X) − b̂(X) − (1−α)/2|` with threshold `Q_{1−α}`.
    pub fn calibrate(
        ladder: LadderEstimator,
        cal: &Dataset,
        alpha: f64,
        offset_step: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let v = cal
            .rows()
            .zip(cal.y())
            .map(|(x, &y)| {
                let lad = ladder.ladder_at(x)?;
                let center = lad.shortest_offset(alpha, offset_step) + 0.5 * (1.0 - alpha);
                Ok((lad.cdf(y) - center).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let scores = ScoreVector::new(v)?;
        let threshold = scores.upper_quantile(1.0 - alpha);
        Ok(Self {
            ladder,
            scores,
            threshold,
            alpha,
            offset_step,
        })
    }

    /// Shortest-interval offset `b̂(x, α)`.
    pub fn offset(&self, x: &[f64]) -> Result<f64> {
        Ok(self
            .ladder
            .ladder_at(x)?
            .shortest_offset(self.alpha, self.offset_step))
    }
}

/// `{y : |F̂(y) − center| ≤ t}` for a monotone `F̂`, which is an interval.
/// A band reaching level 0 or 1 is cut at the ends of the ladder's
/// support rather than left unbounded.
fn invert_band(lad: &QuantileLadder, center: f64, t: f64) -> Interval {
    let lo = lad.quantile(center - t);
    let hi = lad.quantile_upper(center + t);
    Interval::new(lo, hi.max(lo))
}

impl RegionPredictor for Dcp {
    fn predict_region(&self, x: &[f64]) -> Result<PredictionRegion> {
        let lad = self.ladder.ladder_at(x)?;
        let center = lad.shortest_offset(self.alpha, self.offset_step) + 0.5 * (1.0 - self.alpha);
        PredictionRegion::union([invert_band(&lad, center, self.threshold)])
    }
}
