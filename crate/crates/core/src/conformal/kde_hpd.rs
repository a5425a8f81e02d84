use serde::{Deserialize, Serialize};

use super::{check_alpha, fold, RegionPredictor};
use crate::data::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::hpd::{estimate_hpd, HpdResult};
use crate::kde::KdeModel;
use crate::region::{Interval, PredictionRegion};
use crate::regress::{MeanConfig, MeanEstimator, ScaleConfig, ScaleEstimator};
use crate::scores::ScoreVector;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KdeHpdConfig {
    pub mean: MeanConfig,
    /// `ConstantOne` gives the homoscedastic variant; anything else is
    /// trained on the second training fold.
    pub scale: ScaleConfig,
}

/// Conformal score-space interval `[η_j, γ_j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreInterval {
    pub eta: f64,
    pub gamma: f64,
}

/// Fitted KDE-HPD pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeHpd {
    pub mean: MeanEstimator,
    pub scale: ScaleEstimator,
    pub scores: ScoreVector,
    pub kde: KdeModel,
    pub hpd: HpdResult,
    pub bounds: Vec<ScoreInterval>,
    pub alpha: f64,
    /// Score intervals discarded because `η_j > γ_j`.
    pub dropped_pairs: usize,
}

/// Trains `ĝ` on the first fold, `σ̂` on the second (unless constant), and
/// calibrates on the calibration fold.
pub fn fit_kde_hpd(
    data: &Dataset,
    plan: &SplitPlan,
    alpha: f64,
    config: &KdeHpdConfig,
) -> Result<KdeHpd> {
    check_alpha(alpha)?;
    let train1 = fold(data, &plan.idx_train1, "first training")?;
    let cal = fold(data, &plan.idx_cal, "calibration")?;
    let mean = MeanEstimator::fit(&train1, &config.mean)?;
    let scale = if config.scale.is_constant() {
        ScaleEstimator::fit(&train1, &mean, &config.scale)?
    } else {
        let train2 = fold(data, &plan.idx_train2, "second training")?;
        ScaleEstimator::fit(&train2, &mean, &config.scale)?
    };
    KdeHpd::calibrate(mean, scale, &cal, alpha)
}

impl KdeHpd {
    /// Calibrates already-fitted mean and scale estimators.
    pub fn calibrate(
        mean: MeanEstimator,
        scale: ScaleEstimator,
        cal: &Dataset,
        alpha: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let min_cal = (1.0 / alpha).ceil() as usize;
        if cal.len() < min_cal {
            return Err(Error::TooFewRows {
                needed: min_cal,
                got: cal.len(),
            });
        }
        let scores = standardized_scores(&mean, &scale, cal)?;
        let kde = KdeModel::fit(scores.values())?;
        let hpd = estimate_hpd(&kde, alpha)?;
        let mut bounds = Vec::with_capacity(hpd.quantile_pairs.len());
        let mut dropped_pairs = 0;
        for pair in &hpd.quantile_pairs {
            let eta = scores.lower_quantile(pair.lower);
            let gamma = scores.upper_quantile(1.0 - pair.upper);
            if eta > gamma {
                dropped_pairs += 1;
            } else {
                bounds.push(ScoreInterval { eta, gamma });
            }
        }
        Ok(Self {
            mean,
            scale,
            scores,
            kde,
            hpd,
            bounds,
            alpha,
            dropped_pairs,
        })
    }

    /// Number of retained score intervals.
    pub fn components(&self) -> usize {
        self.bounds.len()
    }

    /// The conformal region in score units, before mapping through `ĝ, σ̂`.
    pub fn score_region(&self) -> PredictionRegion {
        PredictionRegion::union(self.bounds.iter().map(|b| Interval::new(b.eta, b.gamma)))
            .expect("bounds satisfy eta <= gamma")
    }
}

pub(crate) fn standardized_scores(
    mean: &MeanEstimator,
    scale: &ScaleEstimator,
    cal: &Dataset,
) -> Result<ScoreVector> {
    let v = cal
        .rows()
        .zip(cal.y())
        .map(|(x, y)| Ok((y - mean.predict(x)?) / scale.predict(x)?))
        .collect::<Result<Vec<f64>>>()?;
    ScoreVector::new(v)
}

impl RegionPredictor for KdeHpd {
    fn predict_region(&self, x: &[f64]) -> Result<PredictionRegion> {
        let g = self.mean.predict(x)?;
        let s = self.scale.predict(x)?;
        Ok(self.score_region().affine(g, s).coalesce())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SplitFractions;
    use crate::regress::ScaleKind;
    use crate::rng::stream;
    use rand::Rng;
    use rand_distr::{Distribution, Normal, Uniform};

    fn linear_normal(n: usize, seed: u64, bimodal: bool) -> Dataset {
        let mut rng = stream(seed, 0);
        let ux = Uniform::new(-5.0, 5.0).unwrap();
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let xi = ux.sample(&mut rng);
            let shift = if bimodal {
                if rng.random::<bool>() {
                    -6.0
                } else {
                    6.0
                }
            } else {
                0.0
            };
            x.push(xi);
            y.push(5.0 + 2.0 * xi + shift + noise.sample(&mut rng));
        }
        Dataset::univariate(x, y).unwrap()
    }

    fn fit(data: &Dataset) -> KdeHpd {
        let plan = SplitPlan::contiguous(data.len(), SplitFractions::HOMOSCEDASTIC).unwrap();
        fit_kde_hpd(data, &plan, 0.1, &KdeHpdConfig::default()).unwrap()
    }

    #[test]
    fn unimodal_pipeline_is_near_normal_hpd() {
        let mut ok = 0;
        for seed in 0..20 {
            // at n^{-1/3} bandwidths the KDE is bumpy near the cutoff, so a
            // gap can split off a short piece; compare the hull instead
            let p = fit(&linear_normal(1000, seed, false));
            let r = p.score_region();
            assert!(p.components() <= 3 && r.length() <= 1.25 * 3.29);
            let (lo, hi) = (r.intervals()[0].lo, r.intervals()[r.len() - 1].hi);
            // endpoint order statistics at n_cal = 500 have sd ≈ 0.1
            if (lo + 1.645).abs() < 0.3 && (hi - 1.645).abs() < 0.3 {
                ok += 1;
            }
        }
        assert!(ok >= 17, "{ok}/20 seeds within tolerance");
    }

    #[test]
    fn bimodal_pipeline_has_two_components() {
        let hits = (0..200)
            .filter(|&s| fit(&linear_normal(1000, 500 + s, true)).components() == 2)
            .count();
        assert!(hits >= 190, "{hits}/200");
    }

    #[test]
    fn identity_estimators_give_raw_hpd_conformal_set() {
        let d = linear_normal(400, 3, false);
        let cal = d.subset(&(200..400).collect::<Vec<_>>());
        let p = KdeHpd::calibrate(
            MeanEstimator::fixed(0.0, 1),
            ScaleEstimator::constant_one(1),
            &cal,
            0.1,
        )
        .unwrap();
        let raw = ScoreVector::new(cal.y().to_vec()).unwrap();
        assert_eq!(p.scores, raw);
        let region = p.predict_region(&[1.234]).unwrap();
        assert_eq!(region, p.score_region());
    }

    #[test]
    fn affine_mapping() {
        let d = linear_normal(1000, 4, false);
        let mut p = fit(&d);
        p.mean = MeanEstimator::fixed(9.0, 1);
        p.bounds = vec![ScoreInterval {
            eta: -1.65,
            gamma: 1.65,
        }];
        let r = p.predict_region(&[0.0]).unwrap();
        assert_eq!(r.intervals().len(), 1);
        assert!(
            (r.intervals()[0].lo - 7.35).abs() < 1e-12
                && (r.intervals()[0].hi - 10.65).abs() < 1e-12
        );

        // overlapping after mapping -> single interval
        p.bounds = vec![
            ScoreInterval {
                eta: -2.0,
                gamma: 0.5,
            },
            ScoreInterval {
                eta: 0.2,
                gamma: 1.0,
            },
        ];
        let r = p.predict_region(&[0.0]).unwrap();
        assert_eq!(r.intervals().len(), 1);
        assert_eq!(r.length(), 3.0);
    }

    #[test]
    fn scale_doubles_length() {
        let d = linear_normal(1000, 5, false);
        let p = fit(&d);
        let base = p.predict_region(&[0.0]).unwrap().length();
        let mut q = p.clone();
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let twos = Dataset::univariate(x, vec![2.0; 50]).unwrap();
        let cfg = ScaleConfig::new(ScaleKind::BinnedQuantileAbsres {
            bins: 1,
            level: 0.5,
        });
        q.scale = ScaleEstimator::fit(&twos, &MeanEstimator::fixed(0.0, 1), &cfg).unwrap();
        let doubled = q.predict_region(&[0.0]).unwrap().length();
        assert!((doubled - 2.0 * base).abs() < 1e-12);
    }

    #[test]
    fn too_small_calibration_fold() {
        let d = linear_normal(12, 6, false);
        let plan = SplitPlan::contiguous(12, SplitFractions::HOMOSCEDASTIC).unwrap();
        assert!(matches!(
            fit_kde_hpd(&d, &plan, 0.1, &KdeHpdConfig::default()),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn scale_model_needs_second_fold() {
        let d = linear_normal(100, 7, false);
        let plan = SplitPlan::contiguous(100, SplitFractions::HOMOSCEDASTIC).unwrap();
        let cfg = KdeHpdConfig {
            scale: ScaleConfig::new(ScaleKind::KnnQuantileAbsres { k: 10, level: 0.9 }),
            ..Default::default()
        };
        assert!(matches!(
            fit_kde_hpd(&d, &plan, 0.1, &cfg),
            Err(Error::InvalidSplit(_))
        ));
    }
}
