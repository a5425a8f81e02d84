use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_dim, check_rows, FeatureMap};
use crate::data::Dataset;
use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-10;

/// Least-squares fit over a feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    features: FeatureMap,
    dim: usize,
    coef: Vec<f64>,
    /// `(XᵀX)⁻¹` in row-major order, kept for leverage computations.
    gram_inv: Vec<f64>,
    residual_ss: f64,
    n: usize,
}

pub(crate) fn design(data: &Dataset, features: &FeatureMap) -> DMatrix<f64> {
    let p = features.n_features(data.dim());
    let mut buf = Vec::with_capacity(data.len() * p);
    for row in data.rows() {
        features.expand_into(row, &mut buf);
    }
    DMatrix::from_row_slice(data.len(), p, &buf)
}

impl LinearFit {
    /// Ordinary least squares of `targets` on the expanded covariates.
    pub fn fit(data: &Dataset, targets: &[f64], features: &FeatureMap) -> Result<Self> {
        let p = features.n_features(data.dim());
        check_rows(p.max(2), data.len())?;
        let x = design(data, features);
        let y = DVector::from_column_slice(targets);
        let svd = x.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 || svd.singular_values.min() <= RANK_TOL * smax {
            return Err(Error::SingularDesign);
        }
        let coef = svd.solve(&y, 0.0).map_err(|_| Error::SingularDesign)?;
        let v_t = svd.v_t.as_ref().ok_or(Error::SingularDesign)?;
        let inv_sq = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / (s * s)));
        let gram_inv = v_t.transpose() * inv_sq * v_t;
        let resid = &y - &x * &coef;
        Ok(Self {
            features: features.clone(),
            dim: data.dim(),
            coef: coef.iter().copied().collect(),
            gram_inv: gram_inv.transpose().iter().copied().collect(),
            residual_ss: resid.norm_squared(),
            n: data.len(),
        })
    }

    pub(crate) fn from_parts(features: FeatureMap, dim: usize, coef: Vec<f64>) -> Self {
        Self {
            features,
            dim,
            coef,
            gram_inv: Vec::new(),
            residual_ss: 0.0,
            n: 0,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = self.coef[0];
        let mut j = 1;
        for &v in x {
            for t in self.features.transforms() {
                acc += self.coef[j] * t.apply(v);
                j += 1;
            }
        }
        acc
    }

    /// Unbiased residual variance `RSS / (n − p)`.
    pub fn residual_variance(&self) -> f64 {
        let dof = self.n.saturating_sub(self.coef.len());
        if dof == 0 {
            0.0
        } else {
            self.residual_ss / dof as f64
        }
    }

    /// `φ(x)ᵀ (XᵀX)⁻¹ φ(x)`.
    pub fn leverage(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        let phi = self.features.expand(x);
        let p = phi.len();
        if self.gram_inv.len() != p * p {
            return Err(Error::InvalidParameter(
                "fit carries no design information".into(),
            ));
        }
        let mut acc = 0.0;
        for i in 0..p {
            for j in 0..p {
                acc += phi[i] * self.gram_inv[i * p + j] * phi[j];
            }
        }
        Ok(acc)
    }
}
