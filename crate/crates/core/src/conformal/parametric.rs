use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_alpha, RegionPredictor};
use crate::data::Dataset;
use crate::error::Result;
use crate::region::{Interval, PredictionRegion};
use crate::regress::{FeatureMap, LinearFit};

/// Normal-theory OLS prediction interval `ĝ ± z·s·√(1 + leverage)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricNormal {
    pub fit: LinearFit,
    pub sigma: f64,
    pub z: f64,
}

pub fn fit_parametric_normal(
    data: &Dataset,
    alpha: f64,
    features: &FeatureMap,
) -> Result<ParametricNormal> {
    check_alpha(alpha)?;
    let fit = LinearFit::fit(data, data.y(), features)?;
    let sigma = fit.residual_variance().sqrt();
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - alpha / 2.0);
    Ok(ParametricNormal { fit, sigma, z })
}

impl RegionPredictor for ParametricNormal {
    fn predict_region(&self, x: &[f64]) -> Result<PredictionRegion> {
        let g = self.fit.predict(x)?;
        let half = self.z * self.sigma * (1.0 + self.fit.leverage(x)?).sqrt();
        PredictionRegion::union([Interval::new(g - half, g + half)])
    }
}
