//! Univariate Gaussian kernel density estimation over calibration scores.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::regress::empirical_quantile;

/// Number of uniform grid points cached per model.
pub const GRID_SIZE: usize = 2048;
/// Grid margin beyond the extreme points, in bandwidths.
pub const GRID_MARGIN: f64 = 4.0;
/// Bandwidth used when the points carry no spread at all.
pub const DEGENERATE_BANDWIDTH: f64 = 1e-3;
/// Kernel contributions beyond this many bandwidths are dropped on the grid
/// (`φ(12) ≈ 2e-32`).
const GRID_CUTOFF: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    #[default]
    Gaussian,
}

impl Kernel {
    pub fn density(self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
        }
    }

    pub fn cdf(self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => 0.5 * erfc(-u * FRAC_1_SQRT_2),
        }
    }
}

fn sample_sd(points: &[f64]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mean = points.iter().sum::<f64>() / n;
    (points.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Rule-of-thumb bandwidth at the `n^{-1/3}` rate:
/// `0.9 · min(sd, IQR/1.34) · n^{-1/3}`.
///
/// Falls back to `sd` alone when the IQR is zero and to
/// [`DEGENERATE_BANDWIDTH`] when the points have no spread.
pub fn bandwidth(points: &[f64]) -> f64 {
    let sd = sample_sd(points);
    if !(sd > 0.0) || !sd.is_finite() {
        return DEGENERATE_BANDWIDTH;
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = empirical_quantile(&sorted, 0.75) - empirical_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (points.len() as f64).powf(-1.0 / 3.0)
}

/// Kernel density estimate with a cached uniform evaluation grid over
/// `[min − 4h, max + 4h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeModel {
    points: Vec<f64>,
    h: f64,
    kernel: Kernel,
    grid_lo: f64,
    grid_step: f64,
    grid_density: Vec<f64>,
}

impl KdeModel {
    pub fn new(points: &[f64], h: f64) -> Result<Self> {
        Self::with_kernel(points, h, Kernel::Gaussian)
    }

    /// Model with the bandwidth chosen by [`bandwidth`].
    pub fn fit(points: &[f64]) -> Result<Self> {
        Self::new(points, bandwidth(points))
    }

    pub fn with_kernel(points: &[f64], h: f64, kernel: Kernel) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NoScores);
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite KDE point".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {h}"
            )));
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        let grid_lo = sorted[0] - GRID_MARGIN * h;
        let grid_hi = sorted[sorted.len() - 1] + GRID_MARGIN * h;
        let grid_step = (grid_hi - grid_lo) / (GRID_SIZE - 1) as f64;
        let mut model = Self {
            points: sorted,
            h,
            kernel,
            grid_lo,
            grid_step,
            grid_density: Vec::new(),
        };
        model.grid_density = model.evaluate_grid();
        Ok(model)
    }

    fn evaluate_grid(&self) -> Vec<f64> {
        let reach = GRID_CUTOFF * self.h;
        let norm = 1.0 / (self.points.len() as f64 * self.h);
        let (mut start, mut end) = (0usize, 0usize);
        (0..GRID_SIZE)
            .map(|i| {
                let z = self.grid_point(i);
                while start < self.points.len() && self.points[start] < z - reach {
                    start += 1;
                }
                while end < self.points.len() && self.points[end] <= z + reach {
                    end += 1;
                }
                let s: f64 = self.points[start..end]
                    .iter()
                    .map(|p| self.kernel.density((p - z) / self.h))
                    .sum();
                s * norm
            })
            .collect()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        self.grid_lo + i as f64 * self.grid_step
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn grid_span(&self) -> (f64, f64) {
        (self.grid_lo, self.grid_point(GRID_SIZE - 1))
    }

    pub fn grid_density(&self) -> &[f64] {
        &self.grid_density
    }

    /// Trapezoid integral of the cached density.
    pub fn grid_integral(&self) -> f64 {
        let d = &self.grid_density;
        let inner: f64 = d[1..d.len() - 1].iter().sum();
        self.grid_step * (inner + 0.5 * (d[0] + d[d.len() - 1]))
    }

    /// Exact density `(1/nh) Σ K((z_i − z)/h)`.
    pub fn density(&self, z: f64) -> f64 {
        let s: f64 = self
            .points
            .iter()
            .map(|p| self.kernel.density((p - z) / self.h))
            .sum();
        s / (self.points.len() as f64 * self.h)
    }

    /// Exact distribution function `(1/n) Σ Φ((z − z_i)/h)`.
    pub fn cdf(&self, z: f64) -> f64 {
        let s: f64 = self
            .points
            .iter()
            .map(|p| self.kernel.cdf((z - p) / self.h))
            .sum();
        (s / self.points.len() as f64).clamp(0.0, 1.0)
    }
}
