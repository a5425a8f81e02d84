use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Gamma, Normal, Uniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Gamma as GammaDist, Normal as NormalDist};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::region::{Interval, PredictionRegion};
use crate::rng::{stream, DATA_STREAM, TEST_STREAM};

const X_LOW: f64 = -5.0;
const X_HIGH: f64 = 5.0;
const ORACLE_GRID: usize = 4001;
const ORACLE_LAMBDA_TOL: f64 = 1e-13;
const ORACLE_ENDPOINT_BISECTIONS: usize = 60;

/// The five data-generating processes, all with `E[Y|X] = 5 + 2X` up to a
/// constant offset and `X ~ Unif(−5, 5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// `ε ~ N(0, 1)`
    UnimodalSymmetric,
    /// `ε ~ Gamma(7.5, 1)`
    UnimodalSkewed,
    /// `ε ~ ½N(−6, 1) + ½N(6, 1)`
    Bimodal,
    /// `ε | X ~ Gamma(1 + 2|X|, rate 1 + 2|X|)`
    Heteroscedastic,
    /// `ε | X ~ N(0, |X|²)`
    Bowtie,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::UnimodalSymmetric,
        ScenarioKind::UnimodalSkewed,
        ScenarioKind::Bimodal,
        ScenarioKind::Heteroscedastic,
        ScenarioKind::Bowtie,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ScenarioKind::UnimodalSymmetric => "unimodal-symmetric",
            ScenarioKind::UnimodalSkewed => "unimodal-skewed",
            ScenarioKind::Bimodal => "bimodal",
            ScenarioKind::Heteroscedastic => "heteroscedastic",
            ScenarioKind::Bowtie => "bowtie",
        }
    }

    pub fn mean(self, x: f64) -> f64 {
        5.0 + 2.0 * x
    }

    /// Law of `Y − (5 + 2x)` given `X = x`.
    pub fn residual_law(self, x: f64) -> ResidualLaw {
        match self {
            ScenarioKind::UnimodalSymmetric => ResidualLaw::Normal { sd: 1.0 },
            ScenarioKind::UnimodalSkewed => ResidualLaw::Gamma {
                shape: 7.5,
                rate: 1.0,
            },
            ScenarioKind::Bimodal => ResidualLaw::SymmetricMixture {
                offset: 6.0,
                sd: 1.0,
            },
            ScenarioKind::Heteroscedastic => {
                let s = 1.0 + 2.0 * x.abs();
                ResidualLaw::Gamma { shape: s, rate: s }
            }
            ScenarioKind::Bowtie => ResidualLaw::Normal { sd: x.abs() },
        }
    }

    /// Whether KDE-HPD trains a scale model for this scenario by default.
    pub fn uses_scale_model(self) -> bool {
        matches!(self, ScenarioKind::Bowtie)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == s).ok_or_else(|| {
            let tags: Vec<&str> = Self::ALL.iter().map(|k| k.tag()).collect();
            Error::InvalidParameter(format!(
                "unknown scenario '{s}'; valid scenarios: {}",
                tags.join(", ")
            ))
        })
    }
}

/// Residual distribution with analytic density and CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResidualLaw {
    /// Centered normal; `sd = 0` is a point mass at zero.
    Normal {
        sd: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// `½N(−offset, sd²) + ½N(offset, sd²)`
    SymmetricMixture {
        offset: f64,
        sd: f64,
    },
}

fn std_normal() -> NormalDist {
    NormalDist::new(0.0, 1.0).expect("standard normal")
}

impl ResidualLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ResidualLaw::Normal { sd } => sd * Normal::new(0.0, 1.0).expect("normal").sample(rng),
            ResidualLaw::Gamma { shape, rate } => {
                Gamma::new(shape, 1.0 / rate).expect("gamma").sample(rng)
            }
            ResidualLaw::SymmetricMixture { offset, sd } => {
                let left = Bernoulli::new(0.5).expect("bernoulli").sample(rng);
                let z = Normal::new(0.0, 1.0).expect("normal").sample(rng);
                if left {
                    -offset + sd * z
                } else {
                    offset + sd * z
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ResidualLaw::Normal { .. } | ResidualLaw::SymmetricMixture { .. } => 0.0,
            ResidualLaw::Gamma { shape, rate } => shape / rate,
        }
    }

    pub fn pdf(&self, z: f64) -> f64 {
        match *self {
            ResidualLaw::Normal { sd } => std_normal().pdf(z / sd) / sd,
            ResidualLaw::Gamma { shape, rate } => {
                if z < 0.0 {
                    0.0
                } else if z == 0.0 {
                    if shape == 1.0 {
                        rate
                    } else {
                        0.0
                    }
                } else {
                    GammaDist::new(shape, rate).expect("gamma").pdf(z)
                }
            }
            ResidualLaw::SymmetricMixture { offset, sd } => {
                let n = std_normal();
                0.5 * (n.pdf((z + offset) / sd) + n.pdf((z - offset) / sd)) / sd
            }
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            ResidualLaw::Normal { sd } => std_normal().cdf(z / sd),
            ResidualLaw::Gamma { shape, rate } => {
                if z <= 0.0 {
                    0.0
                } else {
                    GammaDist::new(shape, rate).expect("gamma").cdf(z)
                }
            }
            ResidualLaw::SymmetricMixture { offset, sd } => {
                let n = std_normal();
                0.5 * (n.cdf((z + offset) / sd) + n.cdf((z - offset) / sd))
            }
        }
    }

    /// Range outside which the law has negligible mass.
    fn search_range(&self) -> (f64, f64) {
        match *self {
            ResidualLaw::Normal { sd } => (-12.0 * sd, 12.0 * sd),
            ResidualLaw::Gamma { shape, rate } => {
                (0.0, (shape + 40.0 * shape.sqrt() + 40.0) / rate)
            }
            ResidualLaw::SymmetricMixture { offset, sd } => {
                (-offset - 12.0 * sd, offset + 12.0 * sd)
            }
        }
    }

    /// Exact smallest region holding `1 − α` of the mass, located by
    /// bisection on the density cutoff with analytic CDF masses.
    pub fn hpd(&self, alpha: f64) -> PredictionRegion {
        if let ResidualLaw::Normal { sd } = *self {
            if sd == 0.0 {
                return PredictionRegion::union([(0.0, 0.0)]).expect("point");
            }
        }
        let (a, b) = self.search_range();
        let step = (b - a) / (ORACLE_GRID - 1) as f64;
        let grid: Vec<f64> = (0..ORACLE_GRID).map(|i| a + i as f64 * step).collect();
        let dens: Vec<f64> = grid.iter().map(|&z| self.pdf(z)).collect();
        let peak = dens.iter().copied().fold(0.0, f64::max);

        let level_set = |lambda: f64| -> Vec<Interval> {
            let mut out = Vec::new();
            let mut i = 0;
            while i < ORACLE_GRID {
                if dens[i] <= lambda {
                    i += 1;
                    continue;
                }
                let start = i;
                while i + 1 < ORACLE_GRID && dens[i + 1] > lambda {
                    i += 1;
                }
                let lo = if start == 0 {
                    grid[0]
                } else {
                    self.crossing(lambda, grid[start - 1], grid[start])
                };
                let hi = if i == ORACLE_GRID - 1 {
                    grid[i]
                } else {
                    self.crossing(lambda, grid[i + 1], grid[i])
                };
                out.push(Interval::new(lo, hi));
                i += 1;
            }
            out
        };
        let mass = |ivs: &[Interval]| {
            ivs.iter()
                .map(|iv| self.cdf(iv.hi) - self.cdf(iv.lo))
                .sum::<f64>()
        };

        let (mut lo, mut hi) = (0.0, peak);
        while hi - lo > ORACLE_LAMBDA_TOL * peak {
            let mid = 0.5 * (lo + hi);
            if mass(&level_set(mid)) > 1.0 - alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        PredictionRegion::union(level_set(lo)).expect("ordered endpoints")
    }

    fn crossing(&self, lambda: f64, mut outside: f64, mut inside: f64) -> f64 {
        for _ in 0..ORACLE_ENDPOINT_BISECTIONS {
            let mid = 0.5 * (outside + inside);
            if self.pdf(mid) > lambda {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (outside + inside)
    }
}

/// Exact smallest `1 − α` region for `Y | X = x`.
pub fn oracle_hpd(kind: ScenarioKind, x: f64, alpha: f64) -> PredictionRegion {
    kind.residual_law(x).hpd(alpha).affine(kind.mean(x), 1.0)
}

/// One simulation configuration: `n_obs` observed rows (split into folds by
/// the methods) and `n_test` fresh out-of-sample rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n_obs: usize,
    pub n_test: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Scenario {
    /// 1000 observed rows, 50 test rows, `α = 0.1`.
    pub fn standard(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            n_obs: 1000,
            n_test: 50,
            alpha: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_obs < 1 {
            return Err(Error::InvalidParameter(
                "scenario needs at least one observation".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Scenario of replication `rep`: same settings, seed `seed + rep`.
    pub fn replication(&self, rep: u64) -> Self {
        Self {
            seed: self.seed.wrapping_add(rep),
            ..*self
        }
    }

    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let ux = Uniform::new(X_LOW, X_HIGH).expect("uniform");
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let xi = ux.sample(rng);
            let eps = self.kind.residual_law(xi).sample(rng);
            x.push(xi);
            y.push(self.kind.mean(xi) + eps);
        }
        Dataset::univariate(x, y).expect("finite draws")
    }

    /// Observed sample and test sample, each from its own stream.
    pub fn generate(&self) -> (Dataset, Dataset) {
        let observed = self.draw(self.n_obs, &mut stream(self.seed, DATA_STREAM));
        let test = self.draw(self.n_test, &mut stream(self.seed, TEST_STREAM));
        (observed, test)
    }

    pub fn oracle(&self, x: f64) -> PredictionRegion {
        oracle_hpd(self.kind, x, self.alpha)
    }
}
