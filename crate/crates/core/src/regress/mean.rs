use serde::{Deserialize, Serialize};

use super::knn::KnnIndex;
use super::{check_dim, check_rows, FeatureMap, LinearFit};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// How to fit the conditional mean `ĝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MeanConfig {
    /// OLS on `[1, x]`.
    OlsLinear,
    /// OLS on an arbitrary feature map.
    OlsWithFeatures { features: FeatureMap },
    /// Average response of the `k` nearest training rows.
    KnnMean { k: usize },
    /// Sample mean of the response.
    Constant,
}

impl Default for MeanConfig {
    fn default() -> Self {
        Self::OlsLinear
    }
}

/// Fitted conditional-mean estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeanEstimator {
    Linear(LinearFit),
    Knn { index: KnnIndex, k: usize },
    Constant { value: f64, dim: usize },
}

impl MeanEstimator {
    pub fn fit(data: &Dataset, config: &MeanConfig) -> Result<Self> {
        match config {
            MeanConfig::OlsLinear => Ok(Self::Linear(LinearFit::fit(
                data,
                data.y(),
                &FeatureMap::linear(),
            )?)),
            MeanConfig::OlsWithFeatures { features } => {
                Ok(Self::Linear(LinearFit::fit(data, data.y(), features)?))
            }
            MeanConfig::KnnMean { k } => {
                if *k == 0 {
                    return Err(Error::InvalidParameter("k must be positive".into()));
                }
                check_rows(2, data.len())?;
                Ok(Self::Knn {
                    index: KnnIndex::new(data, data.y().to_vec()),
                    k: *k,
                })
            }
            MeanConfig::Constant => {
                check_rows(2, data.len())?;
                let value = data.y().iter().sum::<f64>() / data.len() as f64;
                Ok(Self::Constant {
                    value,
                    dim: data.dim(),
                })
            }
        }
    }

    /// A fixed estimator returning `value` everywhere.
    pub fn fixed(value: f64, dim: usize) -> Self {
        Self::Constant { value, dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Linear(fit) => fit.dim(),
            Self::Knn { index, .. } => index.dim(),
            Self::Constant { dim, .. } => *dim,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(match self {
            Self::Linear(fit) => fit.predict_unchecked(x),
            Self::Knn { index, k } => {
                let t = index.neighbor_targets(x, *k);
                t.iter().sum::<f64>() / t.len() as f64
            }
            Self::Constant { value, .. } => *value,
        })
    }

    pub fn predict_many(&self, data: &Dataset) -> Result<Vec<f64>> {
        data.rows().map(|r| self.predict(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand_distr::{Distribution, Normal, Uniform};

    fn exact_line() -> Dataset {
        let x: Vec<f64> = (0..20).map(|i| -5.0 + 0.5 * i as f64).collect();
        let y = x.iter().map(|v| 5.0 + 2.0 * v).collect();
        Dataset::univariate(x, y).unwrap()
    }

    #[test]
    fn ols_interpolates_exact_line() {
        let g = MeanEstimator::fit(&exact_line(), &MeanConfig::OlsLinear).unwrap();
        assert!((g.predict(&[0.0]).unwrap() - 5.0).abs() < 1e-10);
        assert!((g.predict(&[2.0]).unwrap() - 9.0).abs() < 1e-10);
        for x in [-3.3, 0.7, 4.1] {
            assert!((g.predict(&[x]).unwrap() - (5.0 + 2.0 * x)).abs() < 1e-10);
        }
    }

    #[test]
    fn ols_recovers_noisy_coefficients() {
        let mut rng = stream(11, 0);
        let ux = Uniform::new(-5.0, 5.0).unwrap();
        let noise = Normal::new(0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..1000).map(|_| ux.sample(&mut rng)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| 5.0 + 2.0 * v + noise.sample(&mut rng))
            .collect();
        let d = Dataset::univariate(x, y).unwrap();
        let MeanEstimator::Linear(fit) = MeanEstimator::fit(&d, &MeanConfig::OlsLinear).unwrap()
        else {
            panic!("expected linear fit");
        };
        assert!((fit.coefficients()[0] - 5.0).abs() < 0.2);
        assert!((fit.coefficients()[1] - 2.0).abs() < 0.2);
        let resid_sum: f64 = d
            .rows()
            .zip(d.y())
            .map(|(r, y)| y - fit.predict(r).unwrap())
            .sum();
        assert!(resid_sum.abs() < 1e-8 * d.len() as f64);
    }

    #[test]
    fn constant_and_degenerate_knn_give_sample_mean() {
        let d = exact_line();
        let mean = d.y().iter().sum::<f64>() / d.len() as f64;
        let c = MeanEstimator::fit(&d, &MeanConfig::Constant).unwrap();
        assert_eq!(c.predict(&[3.0]).unwrap(), mean);
        let knn = MeanEstimator::fit(&d, &MeanConfig::KnnMean { k: d.len() }).unwrap();
        assert!((knn.predict(&[-4.0]).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_and_too_few_rows() {
        let g = MeanEstimator::fit(&exact_line(), &MeanConfig::OlsLinear).unwrap();
        assert_eq!(
            g.predict(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        );
        let one = Dataset::univariate(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            MeanEstimator::fit(&one, &MeanConfig::OlsLinear),
            Err(Error::TooFewRows { .. })
        ));
    }
}
