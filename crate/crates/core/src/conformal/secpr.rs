use serde::{Deserialize, Serialize};

use super::kde_hpd::standardized_scores;
use super::{fold, RegionPredictor};
use crate::data::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::region::{Interval, PredictionRegion};
use crate::regress::{MeanConfig, MeanEstimator, ScaleEstimator};
use crate::scores::ScoreVector;

/// Sign convention of the calibration scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SecprForm {
    /// `V = Y − ĝ`, region `[ĝ + R_{α1}(V), ĝ + Q_{1−α2}(V)]`.
    #[default]
    Signed,
    /// `V' = ĝ − Y`, region `[ĝ − Q_{1−α1}(V'), ĝ − R_{α2}(V')]`. Picks the
    /// same order statistics as `Signed` whenever `α1(n+1)` and `α2(n+1)`
    /// are not integers.
    Flipped,
}

/// Signed-error conformal interval with separate lower and upper tail
/// budgets `α1 + α2 = α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Secpr {
    pub mean: MeanEstimator,
    pub scale: ScaleEstimator,
    pub scores: ScoreVector,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    /// Score-space offsets added to `ĝ` (times `σ̂`).
    pub lower: f64,
    pub upper: f64,
}

/// Fits `ĝ` on all training rows and calibrates unstandardized signed
/// residuals.
pub fn fit_secpr(
    data: &Dataset,
    plan: &SplitPlan,
    alpha_lower: f64,
    alpha_upper: f64,
    mean: &MeanConfig,
) -> Result<Secpr> {
    let train = fold(data, &super::training_rows(plan), "training")?;
    let cal = fold(data, &plan.idx_cal, "calibration")?;
    let g = MeanEstimator::fit(&train, mean)?;
    Secpr::calibrate(
        g,
        ScaleEstimator::constant_one(data.dim()),
        &cal,
        alpha_lower,
        alpha_upper,
        SecprForm::Signed,
    )
}

impl Secpr {
    pub fn calibrate(
        mean: MeanEstimator,
        scale: ScaleEstimator,
        cal: &Dataset,
        alpha_lower: f64,
        alpha_upper: f64,
        form: SecprForm,
    ) -> Result<Self> {
        if !(alpha_lower >= 0.0 && alpha_upper >= 0.0 && alpha_lower + alpha_upper < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail budgets ({alpha_lower}, {alpha_upper}) must be non-negative with sum below 1"
            )));
        }
        let scores = standardized_scores(&mean, &scale, cal)?;
        let (lower, upper) = match form {
            SecprForm::Signed => (
                scores.lower_quantile(alpha_lower),
                scores.upper_quantile(1.0 - alpha_upper),
            ),
            SecprForm::Flipped => {
                let flipped = ScoreVector::new(scores.values().iter().map(|v| -v).collect())?;
                (
                    -flipped.upper_quantile(1.0 - alpha_lower),
                    -flipped.lower_quantile(alpha_upper),
                )
            }
        };
        Ok(Self {
            mean,
            scale,
            scores,
            alpha_lower,
            alpha_upper,
            lower,
            upper,
        })
    }
}

impl RegionPredictor for Secpr {
    fn predict_region(&self, x: &[f64]) -> Result<PredictionRegion> {
        let g = self.mean.predict(x)?;
        let s = self.scale.predict(x)?;
        if self.lower > self.upper {
            return Ok(PredictionRegion::empty());
        }
        PredictionRegion::union([Interval::new(g + self.lower * s, g + self.upper * s)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibrate_seq(n: usize, a1: f64, a2: f64, form: SecprForm) -> Secpr {
        let x: Vec<f64> = vec![0.0; n];
        let y: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let cal = Dataset::univariate(x, y).unwrap();
        Secpr::calibrate(
            MeanEstimator::fixed(0.0, 1),
            ScaleEstimator::constant_one(1),
            &cal,
            a1,
            a2,
            form,
        )
        .unwrap()
    }

    #[test]
    fn index_examples() {
        let s = calibrate_seq(99, 0.05, 0.05, SecprForm::Signed);
        assert_eq!((s.lower, s.upper), (4.0, 95.0));
        let s = calibrate_seq(99, 0.0, 0.1, SecprForm::Signed);
        assert_eq!((s.lower, s.upper), (f64::NEG_INFINITY, 90.0));
        let r = s.predict_region(&[0.0]).unwrap();
        assert_eq!(r.intervals()[0].lo, f64::NEG_INFINITY);
    }

    #[test]
    fn flipped_form_agrees_off_integer_grid() {
        // α(n+1) not an integer: the two sign conventions pick the same ranks
        for (n, a1, a2) in [(500, 0.05, 0.05), (200, 0.03, 0.07), (57, 0.1, 0.0)] {
            let a = calibrate_seq(n, a1, a2, SecprForm::Signed);
            let b = calibrate_seq(n, a1, a2, SecprForm::Flipped);
            assert_eq!((a.lower, a.upper), (b.lower, b.upper), "n={n}");
        }
    }

    #[test]
    fn rejects_bad_budgets() {
        let cal = Dataset::univariate(vec![0.0; 5], vec![1.0; 5]).unwrap();
        let g = MeanEstimator::fixed(0.0, 1);
        assert!(Secpr::calibrate(
            g.clone(),
            ScaleEstimator::constant_one(1),
            &cal,
            -0.1,
            0.1,
            SecprForm::Signed
        )
        .is_err());
        assert!(Secpr::calibrate(
            g,
            ScaleEstimator::constant_one(1),
            &cal,
            0.6,
            0.5,
            SecprForm::Signed
        )
        .is_err());
    }
}
