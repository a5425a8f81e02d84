use serde::{Deserialize, Serialize};

use crate::data::Dataset;

/// Brute-force nearest-neighbour index over stored covariates with one
/// target value per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnIndex {
    x: Vec<f64>,
    targets: Vec<f64>,
    dim: usize,
}

impl KnnIndex {
    pub(crate) fn new(data: &Dataset, targets: Vec<f64>) -> Self {
        debug_assert_eq!(targets.len(), data.len());
        let mut x = Vec::with_capacity(data.len() * data.dim());
        for row in data.rows() {
            x.extend_from_slice(row);
        }
        Self {
            x,
            targets,
            dim: data.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    /// Targets of the `k` nearest stored rows (Euclidean), ties broken by
    /// row order. Returned in ascending target order.
    pub(crate) fn neighbor_targets(&self, q: &[f64], k: usize) -> Vec<f64> {
        let k = k.min(self.len());
        let mut dist: Vec<(f64, usize)> = (0..self.len())
            .map(|i| {
                let row = &self.x[i * self.dim..(i + 1) * self.dim];
                let d: f64 = row.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        if k < dist.len() {
            dist.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.truncate(k);
        }
        let mut out: Vec<f64> = dist.iter().map(|&(_, i)| self.targets[i]).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}
