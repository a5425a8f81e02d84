use serde::{Deserialize, Serialize};

use super::knn::KnnIndex;
use super::quantile::empirical_quantile;
use super::{check_dim, check_rows, FeatureMap, LinearFit, MeanEstimator};
use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_SCALE_FLOOR: f64 = 1e-6;

/// Estimator family for the conditional scale `σ̂`; every non-constant kind
/// regresses `|Y − ĝ(X)|` on `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ScaleKind {
    ConstantOne,
    OlsAbsres {
        features: FeatureMap,
    },
    KnnQuantileAbsres {
        k: usize,
        level: f64,
    },
    /// Equal-count bins on the first covariate; one quantile per bin.
    BinnedQuantileAbsres {
        bins: usize,
        level: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    pub kind: ScaleKind,
    pub floor: f64,
}

impl ScaleConfig {
    pub fn new(kind: ScaleKind) -> Self {
        Self {
            kind,
            floor: DEFAULT_SCALE_FLOOR,
        }
    }

    pub fn constant_one() -> Self {
        Self::new(ScaleKind::ConstantOne)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ScaleKind::ConstantOne)
    }
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self::constant_one()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ScaleModel {
    One,
    Linear(LinearFit),
    Knn {
        index: KnnIndex,
        k: usize,
        level: f64,
    },
    Binned {
        upper_edges: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Fitted conditional scale; never returns less than its floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimator {
    model: ScaleModel,
    floor: f64,
    dim: usize,
}

impl ScaleEstimator {
    /// `σ̂ ≡ 1`.
    pub fn constant_one(dim: usize) -> Self {
        Self {
            model: ScaleModel::One,
            floor: DEFAULT_SCALE_FLOOR,
            dim,
        }
    }

    /// Regresses absolute residuals of `mean` on the scale fold.
    pub fn fit(data: &Dataset, mean: &MeanEstimator, config: &ScaleConfig) -> Result<Self> {
        if !(config.floor > 0.0) {
            return Err(Error::InvalidParameter(
                "scale floor must be positive".into(),
            ));
        }
        let dim = mean.dim();
        if matches!(config.kind, ScaleKind::ConstantOne) {
            return Ok(Self {
                model: ScaleModel::One,
                floor: config.floor,
                dim,
            });
        }
        check_rows(2, data.len())?;
        let absres: Vec<f64> = data
            .rows()
            .zip(data.y())
            .map(|(x, y)| mean.predict(x).map(|g| (y - g).abs()))
            .collect::<Result<_>>()?;
        let model = match &config.kind {
            ScaleKind::ConstantOne => unreachable!(),
            ScaleKind::OlsAbsres { features } => {
                ScaleModel::Linear(LinearFit::fit(data, &absres, features)?)
            }
            ScaleKind::KnnQuantileAbsres { k, level } => {
                check_level(*level)?;
                if *k == 0 {
                    return Err(Error::InvalidParameter("k must be positive".into()));
                }
                check_rows(*k, data.len())?;
                ScaleModel::Knn {
                    index: KnnIndex::new(data, absres),
                    k: *k,
                    level: *level,
                }
            }
            ScaleKind::BinnedQuantileAbsres { bins, level } => {
                check_level(*level)?;
                fit_binned(data, &absres, *bins, *level)?
            }
        };
        Ok(Self {
            model,
            floor: config.floor,
            dim,
        })
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn is_constant_one(&self) -> bool {
        matches!(self.model, ScaleModel::One)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        let raw = match &self.model {
            ScaleModel::One => return Ok(1.0),
            ScaleModel::Linear(fit) => fit.predict_unchecked(x),
            ScaleModel::Knn { index, k, level } => {
                empirical_quantile(&index.neighbor_targets(x, *k), *level)
            }
            ScaleModel::Binned {
                upper_edges,
                values,
            } => {
                let b = upper_edges
                    .partition_point(|&e| e < x[0])
                    .min(values.len() - 1);
                values[b]
            }
        };
        Ok(clamp_floor(raw, self.floor))
    }
}

fn clamp_floor(v: f64, floor: f64) -> f64 {
    if v.is_nan() || v < floor {
        floor
    } else {
        v
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level {level} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Equal-count bins on the first covariate. Queries beyond the training
/// range fall into the outermost bins.
fn fit_binned(data: &Dataset, absres: &[f64], bins: usize, level: f64) -> Result<ScaleModel> {
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    if data.dim() != 1 {
        return Err(Error::InvalidParameter(
            "binned scale estimator needs one covariate".into(),
        ));
    }
    let bins = bins.min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data.row(a)[0].total_cmp(&data.row(b)[0]).then(a.cmp(&b)));
    let mut upper_edges = Vec::with_capacity(bins);
    let mut values = Vec::with_capacity(bins);
    for b in 0..bins {
        let start = b * data.len() / bins;
        let end = (b + 1) * data.len() / bins;
        let mut r: Vec<f64> = order[start..end].iter().map(|&i| absres[i]).collect();
        r.sort_by(f64::total_cmp);
        values.push(empirical_quantile(&r, level));
        upper_edges.push(data.row(order[end - 1])[0]);
    }
    Ok(ScaleModel::Binned {
        upper_edges,
        values,
    })
}
