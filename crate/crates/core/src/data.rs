//! Paired covariate/response samples and the fold assignment used by split
//! conformal methods.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major covariate matrix with a response vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset from per-row covariate vectors.
    pub fn from_rows(rows: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(Error::InvalidData(format!(
                "{} covariate rows but {} responses",
                rows.len(),
                y.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut x = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidData(format!(
                    "row {i} has {} covariates, expected {dim}",
                    row.len()
                )));
            }
            x.extend(row);
        }
        Self::from_flat(x, y, dim)
    }

    /// Builds a dataset from a row-major flat covariate buffer.
    pub fn from_flat(x: Vec<f64>, y: Vec<f64>, dim: usize) -> Result<Self> {
        if x.len() != y.len() * dim {
            return Err(Error::InvalidData(format!(
                "covariate buffer of length {} does not match {} rows of dimension {dim}",
                x.len(),
                y.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite covariate in row {}",
                i / dim.max(1)
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite response in row {i}"
            )));
        }
        Ok(Self { x, y, dim })
    }

    /// Single-covariate convenience constructor.
    pub fn univariate(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::from_flat(x, y, 1)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Copies the listed rows into a new dataset, preserving order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut x = Vec::with_capacity(idx.len() * self.dim);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Self {
            x,
            y,
            dim: self.dim,
        }
    }

    /// Returns a copy with every response shifted by `c`.
    pub fn shift_response(&self, c: f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v + c).collect(),
            dim: self.dim,
        }
    }
}

/// Fold fractions for the two training folds and the calibration fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train1: f64,
    pub train2: f64,
    pub cal: f64,
}

impl SplitFractions {
    /// 50/50 train/calibration, no scale fold.
    pub const HOMOSCEDASTIC: Self = Self {
        train1: 0.5,
        train2: 0.0,
        cal: 0.5,
    };
    /// 25/25/50 when a scale model is trained.
    pub const HETEROSCEDASTIC: Self = Self {
        train1: 0.25,
        train2: 0.25,
        cal: 0.5,
    };

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train1, self.train2, self.cal];
        if parts.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidSplit("fractions must be non-negative".into()));
        }
        if parts.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::InvalidSplit("fractions sum to more than 1".into()));
        }
        Ok(())
    }
}

/// Disjoint index lists for the first training fold (mean model), the second
/// training fold (scale model, possibly empty) and the calibration fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub idx_train1: Vec<usize>,
    pub idx_train2: Vec<usize>,
    pub idx_cal: Vec<usize>,
}

impl SplitPlan {
    pub fn new(
        idx_train1: Vec<usize>,
        idx_train2: Vec<usize>,
        idx_cal: Vec<usize>,
        n: usize,
    ) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in idx_train1.iter().chain(&idx_train2).chain(&idx_cal) {
            if i >= n {
                return Err(Error::InvalidSplit(format!(
                    "index {i} out of range for {n} rows"
                )));
            }
            if seen[i] {
                return Err(Error::InvalidSplit(format!(
                    "index {i} assigned to more than one fold"
                )));
            }
            seen[i] = true;
        }
        Ok(Self {
            idx_train1,
            idx_train2,
            idx_cal,
        })
    }

    /// Assigns consecutive blocks of rows `0..n` to the folds in order.
    pub fn contiguous(n: usize, fractions: SplitFractions) -> Result<Self> {
        fractions.validate()?;
        let order: Vec<usize> = (0..n).collect();
        Ok(Self::from_order(&order, fractions))
    }

    /// Random fold assignment from a uniform permutation of the rows.
    pub fn shuffled<R: Rng + ?Sized>(
        n: usize,
        fractions: SplitFractions,
        rng: &mut R,
    ) -> Result<Self> {
        fractions.validate()?;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Ok(Self::from_order(&order, fractions))
    }

    fn from_order(order: &[usize], fr: SplitFractions) -> Self {
        let n = order.len();
        let n1 = (fr.train1 * n as f64).round() as usize;
        let n2 = ((fr.train2 * n as f64).round() as usize).min(n - n1);
        let nc = ((fr.cal * n as f64).round() as usize).min(n - n1 - n2);
        Self {
            idx_train1: order[..n1].to_vec(),
            idx_train2: order[n1..n1 + n2].to_vec(),
            idx_cal: order[n1 + n2..n1 + n2 + nc].to_vec(),
        }
    }

    pub fn has_scale_fold(&self) -> bool {
        !self.idx_train2.is_empty()
    }
}
