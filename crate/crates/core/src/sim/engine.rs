use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{oracle_hpd, Scenario, ScenarioKind};
use crate::conformal::{
    fit_cqr, fit_dcp, fit_kde_hpd, fit_parametric_normal, fit_secpr, Cqr, CqrConfig, Dcp,
    DcpConfig, KdeHpd, KdeHpdConfig, ParametricNormal, RegionPredictor, Secpr,
};
use crate::data::{Dataset, SplitFractions, SplitPlan};
use crate::error::{Error, Result};
use crate::region::PredictionRegion;
use crate::regress::{FeatureMap, MeanConfig, ScaleConfig, ScaleKind};

/// Neighbourhood size of the default k-NN scale model.
const SCALE_KNN_K: usize = 15;
/// Quantile of `|Y − ĝ|` used as the default scale.
const SCALE_LEVEL: f64 = 0.9;

/// Prediction method compared in simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// KDE-HPD; trains a scale model only when asked to (bowtie scenario).
    KdeHpd,
    KdeHpdHomo,
    KdeHpdScaled,
    /// Equal-tailed signed-error interval.
    Secpr,
    Cqr,
    Dcp,
    ParametricNormal,
    /// True conditional HPD set; simulation only.
    Oracle,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::KdeHpd,
        Method::KdeHpdHomo,
        Method::KdeHpdScaled,
        Method::Secpr,
        Method::Cqr,
        Method::Dcp,
        Method::ParametricNormal,
        Method::Oracle,
    ];

    /// Methods of the standard comparison table.
    pub const COMPARISON: [Method; 5] = [
        Method::KdeHpd,
        Method::Secpr,
        Method::Cqr,
        Method::Dcp,
        Method::Oracle,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::KdeHpd => "kde-hpd",
            Method::KdeHpdHomo => "kde-hpd-homo",
            Method::KdeHpdScaled => "kde-hpd-scaled",
            Method::Secpr => "secpr",
            Method::Cqr => "cqr",
            Method::Dcp => "dcp",
            Method::ParametricNormal => "parametric-normal",
            Method::Oracle => "oracle",
        }
    }

    fn scaled(self, auto_scale: bool) -> bool {
        match self {
            Method::KdeHpd => auto_scale,
            Method::KdeHpdScaled => true,
            _ => false,
        }
    }

    /// Fold fractions used on the observed sample.
    pub fn split_fractions(self, auto_scale: bool) -> SplitFractions {
        if self.scaled(auto_scale) {
            SplitFractions::HETEROSCEDASTIC
        } else {
            SplitFractions::HOMOSCEDASTIC
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == s).ok_or_else(|| {
            let tags: Vec<&str> = Self::ALL.iter().map(|m| m.tag()).collect();
            Error::InvalidParameter(format!(
                "unknown method '{s}'; valid methods: {}",
                tags.join(", ")
            ))
        })
    }
}

/// A fitted method of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedMethod {
    KdeHpd(Box<KdeHpd>),
    Secpr(Box<Secpr>),
    Cqr(Box<Cqr>),
    Dcp(Box<Dcp>),
    ParametricNormal(Box<ParametricNormal>),
    Oracle { kind: ScenarioKind, alpha: f64 },
}

impl FittedMethod {
    /// Number of disjoint score-space intervals, for KDE-HPD.
    pub fn components(&self) -> Option<usize> {
        match self {
            FittedMethod::KdeHpd(m) => Some(m.score_region().len()),
            _ => None,
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let FittedMethod::KdeHpd(m) = self {
            if m.hpd.slivers_dropped > 0 {
                out.push(format!(
                    "dropped {} low-mass HPD sliver(s)",
                    m.hpd.slivers_dropped
                ));
            }
            if m.dropped_pairs > 0 {
                out.push(format!(
                    "dropped {} empty conformal interval(s)",
                    m.dropped_pairs
                ));
            }
        }
        out
    }
}

impl RegionPredictor for FittedMethod {
    fn predict_region(&self, x: &[f64]) -> Result<PredictionRegion> {
        match self {
            FittedMethod::KdeHpd(m) => m.predict_region(x),
            FittedMethod::Secpr(m) => m.predict_region(x),
            FittedMethod::Cqr(m) => m.predict_region(x),
            FittedMethod::Dcp(m) => m.predict_region(x),
            FittedMethod::ParametricNormal(m) => m.predict_region(x),
            FittedMethod::Oracle { kind, alpha } => {
                let x0 = *x.first().ok_or(Error::DimensionMismatch {
                    expected: 1,
                    got: 0,
                })?;
                Ok(oracle_hpd(*kind, x0, *alpha))
            }
        }
    }
}

/// Fits `method` on `data` with a contiguous split. `auto_scale` turns on the
/// scale model for plain `kde-hpd`; `oracle` is the data-generating process,
/// required only by `Method::Oracle`.
pub fn fit_method(
    method: Method,
    data: &Dataset,
    alpha: f64,
    auto_scale: bool,
    oracle: Option<ScenarioKind>,
) -> Result<FittedMethod> {
    let plan = SplitPlan::contiguous(data.len(), method.split_fractions(auto_scale))?;
    fit_method_with_plan(method, data, &plan, alpha, auto_scale, oracle)
}

/// As [`fit_method`], with an explicit split of `data`.
pub fn fit_method_with_plan(
    method: Method,
    data: &Dataset,
    plan: &SplitPlan,
    alpha: f64,
    auto_scale: bool,
    oracle: Option<ScenarioKind>,
) -> Result<FittedMethod> {
    Ok(match method {
        Method::KdeHpd | Method::KdeHpdHomo | Method::KdeHpdScaled => {
            let scale = if method.scaled(auto_scale) {
                ScaleConfig::new(ScaleKind::KnnQuantileAbsres {
                    k: SCALE_KNN_K,
                    level: SCALE_LEVEL,
                })
            } else {
                ScaleConfig::constant_one()
            };
            let config = KdeHpdConfig {
                mean: MeanConfig::default(),
                scale,
            };
            FittedMethod::KdeHpd(Box::new(fit_kde_hpd(data, plan, alpha, &config)?))
        }
        Method::Secpr => FittedMethod::Secpr(Box::new(fit_secpr(
            data,
            plan,
            alpha / 2.0,
            alpha / 2.0,
            &MeanConfig::default(),
        )?)),
        Method::Cqr => {
            FittedMethod::Cqr(Box::new(fit_cqr(data, plan, alpha, &CqrConfig::default())?))
        }
        Method::Dcp => {
            FittedMethod::Dcp(Box::new(fit_dcp(data, plan, alpha, &DcpConfig::default())?))
        }
        Method::ParametricNormal => {
            let train = data.subset(&crate::conformal::training_rows(plan));
            FittedMethod::ParametricNormal(Box::new(fit_parametric_normal(
                &train,
                alpha,
                &FeatureMap::linear(),
            )?))
        }
        Method::Oracle => {
            let kind = oracle.ok_or_else(|| {
                Error::InvalidParameter(
                    "the oracle method needs a known data-generating scenario".into(),
                )
            })?;
            FittedMethod::Oracle { kind, alpha }
        }
    })
}

/// Outcome at one test row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPoint {
    pub x: Vec<f64>,
    pub y: f64,
    pub covered: bool,
    pub size: f64,
    pub intervals: usize,
}

/// Outcome of one method in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepReport {
    pub method: Method,
    pub rep: u64,
    pub seed: u64,
    pub points: Vec<TestPoint>,
    pub coverage: f64,
    pub mean_size: f64,
    /// Wall-clock seconds for fitting plus predicting; the only
    /// non-deterministic field.
    pub runtime_s: f64,
    pub components: Option<usize>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl RepReport {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self {
            runtime_s: 0.0,
            ..self.clone()
        } == Self {
            runtime_s: 0.0,
            ..other.clone()
        }
    }
}

/// Replication-level averages for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub reps: usize,
    pub failures: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_size: f64,
    pub size_se: f64,
    pub mean_runtime_s: f64,
    /// Mean number of KDE-HPD score components.
    pub mean_components: Option<f64>,
    pub warnings: usize,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

impl MethodSummary {
    pub fn from_reports<'a>(
        method: Method,
        reports: impl IntoIterator<Item = &'a RepReport>,
    ) -> Self {
        let all: Vec<&RepReport> = reports.into_iter().filter(|r| r.method == method).collect();
        let ok: Vec<&RepReport> = all.iter().copied().filter(|r| !r.failed()).collect();
        let (coverage, coverage_se) = mean_se(&ok.iter().map(|r| r.coverage).collect::<Vec<_>>());
        let (mean_size, size_se) = mean_se(&ok.iter().map(|r| r.mean_size).collect::<Vec<_>>());
        let (mean_runtime_s, _) = mean_se(&ok.iter().map(|r| r.runtime_s).collect::<Vec<_>>());
        let comps: Vec<f64> = ok
            .iter()
            .filter_map(|r| r.components.map(|c| c as f64))
            .collect();
        Self {
            method,
            reps: all.len(),
            failures: all.len() - ok.len(),
            coverage,
            coverage_se,
            mean_size,
            size_se,
            mean_runtime_s,
            mean_components: (!comps.is_empty()).then(|| mean_se(&comps).0),
            warnings: all.iter().map(|r| r.warnings.len()).sum(),
        }
    }
}

/// All replications of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub replications: usize,
    /// Replication-major, then in `methods` order.
    pub reports: Vec<RepReport>,
    pub summaries: Vec<MethodSummary>,
}

impl SimulationReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn reports_for(&self, method: Method) -> impl Iterator<Item = &RepReport> + '_ {
        self.reports.iter().filter(move |r| r.method == method)
    }

    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.scenario == other.scenario
            && self.methods == other.methods
            && self.reports.len() == other.reports.len()
            && self
                .reports
                .iter()
                .zip(&other.reports)
                .all(|(a, b)| a.same_outcome(b))
    }
}

fn run_method(
    scn: &Scenario,
    rep: u64,
    method: Method,
    observed: &Dataset,
    test: &Dataset,
) -> RepReport {
    let start = Instant::now();
    let outcome = fit_method(
        method,
        observed,
        scn.alpha,
        scn.kind.uses_scale_model(),
        Some(scn.kind),
    )
    .and_then(|m| {
        let regions = m.predict_regions(test)?;
        Ok((m, regions))
    });
    let runtime_s = start.elapsed().as_secs_f64();
    let mut report = RepReport {
        method,
        rep,
        seed: scn.seed,
        points: Vec::new(),
        coverage: f64::NAN,
        mean_size: f64::NAN,
        runtime_s,
        components: None,
        warnings: Vec::new(),
        error: None,
    };
    match outcome {
        Ok((fitted, regions)) => {
            report.points = test
                .rows()
                .zip(test.y())
                .zip(&regions)
                .map(|((x, &y), r)| TestPoint {
                    x: x.to_vec(),
                    y,
                    covered: r.contains(y),
                    size: r.length(),
                    intervals: r.len(),
                })
                .collect();
            let n = report.points.len() as f64;
            report.coverage = report.points.iter().filter(|p| p.covered).count() as f64 / n;
            report.mean_size = report.points.iter().map(|p| p.size).sum::<f64>() / n;
            report.components = fitted.components();
            report.warnings = fitted.warnings();
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

fn run_one(base: &Scenario, rep: u64, methods: &[Method]) -> Vec<RepReport> {
    let scn = base.replication(rep);
    let (observed, test) = scn.generate();
    methods
        .iter()
        .map(|&m| run_method(&scn, rep, m, &observed, &test))
        .collect()
}

/// Runs `reps` replications (seeds `seed, seed+1, …`) of every method on a
/// shared observed/test sample per replication. Results do not depend on
/// `threads`; `None` uses rayon's default pool.
pub fn run_replications(
    scenario: &Scenario,
    methods: &[Method],
    reps: usize,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    scenario.validate()?;
    if scenario.n_test == 0 {
        return Err(Error::InvalidParameter(
            "scenario needs at least one test row".into(),
        ));
    }
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    let job = || -> Vec<RepReport> {
        (0..reps as u64)
            .into_par_iter()
            .flat_map_iter(|r| run_one(scenario, r, methods))
            .collect()
    };
    let reports = match threads {
        Some(0) => {
            return Err(Error::InvalidParameter(
                "thread count must be positive".into(),
            ))
        }
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?
            .install(job),
        None => job(),
    };
    let summaries = methods
        .iter()
        .map(|&m| MethodSummary::from_reports(m, &reports))
        .collect();
    Ok(SimulationReport {
        scenario: *scenario,
        methods: methods.to_vec(),
        replications: reps,
        reports,
        summaries,
    })
}
