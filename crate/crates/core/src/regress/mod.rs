//! Pluggable conditional mean, scale and quantile estimators.
//!
//! Every estimator is fitted once and is immutable afterwards; evaluation is
//! reentrant.

mod features;
mod knn;
mod mean;
mod ols;
mod quantile;
mod scale;

pub use features::{FeatureMap, Transform};
pub use knn::KnnIndex;
pub use mean::{MeanConfig, MeanEstimator};
pub use ols::LinearFit;
pub use quantile::{
    empirical_quantile, LadderEstimator, QuantileConfig, QuantileEstimator, QuantileLadder,
    DEFAULT_LADDER_LEVELS,
};
pub use scale::{ScaleConfig, ScaleEstimator, ScaleKind, DEFAULT_SCALE_FLOOR};

use crate::error::{Error, Result};

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_rows(needed: usize, got: usize) -> Result<()> {
    if got < needed {
        return Err(Error::TooFewRows { needed, got });
    }
    Ok(())
}
