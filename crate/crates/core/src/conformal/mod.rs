//! Split-conformal prediction pipelines: KDE-HPD and the interval baselines
//! it is compared against.

mod cqr;
mod dcp;
mod kde_hpd;
mod parametric;
mod secpr;

pub use cqr::{fit_cqr, Cqr, CqrConfig};
pub use dcp::{fit_dcp, Dcp, DcpConfig};
pub use kde_hpd::{fit_kde_hpd, KdeHpd, KdeHpdConfig, ScoreInterval};
pub use parametric::{fit_parametric_normal, ParametricNormal};
pub use secpr::{fit_secpr, Secpr, SecprForm};

use crate::data::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::region::PredictionRegion;

/// A fitted method that maps a covariate vector to a prediction region.
pub trait RegionPredictor {
    fn predict_region(&self, x: &[f64]) -> Result<PredictionRegion>;

    fn predict_regions(&self, data: &Dataset) -> Result<Vec<PredictionRegion>> {
        data.rows().map(|x| self.predict_region(x)).collect()
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0, 1)"
        )));
    }
    Ok(())
}

pub(crate) fn fold(data: &Dataset, idx: &[usize], name: &str) -> Result<Dataset> {
    if idx.is_empty() {
        return Err(Error::InvalidSplit(format!("{name} fold is empty")));
    }
    Ok(data.subset(idx))
}

/// Rows of both training folds, for methods without a separate scale fold.
pub(crate) fn training_rows(plan: &SplitPlan) -> Vec<usize> {
    plan.idx_train1
        .iter()
        .chain(&plan.idx_train2)
        .copied()
        .collect()
}
