//! Conformal prediction regions built from the highest-density set of a
//! kernel density estimate of calibration scores, together with interval
//! baselines and a simulation harness for comparing them.
//!
//! The region for a new covariate `x` is
//! `⋃_j [ĝ(x) + η_j σ̂(x), ĝ(x) + γ_j σ̂(x)]`, where each `[η_j, γ_j]` is a
//! conformal widening of one connected component of the estimated HPD set of
//! the standardized scores `(Y − ĝ(X)) / σ̂(X)`.
//!
//! ```
//! use kdehpd::conformal::{fit_kde_hpd, KdeHpdConfig, RegionPredictor};
//! use kdehpd::data::{Dataset, SplitFractions, SplitPlan};
//!
//! let x: Vec<f64> = (0..400).map(|i| i as f64 / 40.0).collect();
//! let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 1.0 + v + ((i * 37 % 101) as f64 / 50.0 - 1.0)).collect();
//! let data = Dataset::univariate(x, y).unwrap();
//! let plan = SplitPlan::contiguous(data.len(), SplitFractions::HOMOSCEDASTIC).unwrap();
//! let model = fit_kde_hpd(&data, &plan, 0.1, &KdeHpdConfig::default()).unwrap();
//! let region = model.predict_region(&[5.0]).unwrap();
//! assert!(region.contains(6.0));
//! ```

pub mod conformal;
pub mod data;
pub mod error;
pub mod hpd;
pub mod kde;
pub mod region;
pub mod regress;
pub mod rng;
pub mod scores;
pub mod sim;

pub use error::{Error, Result};
pub use region::{hausdorff, Interval, PredictionRegion};
