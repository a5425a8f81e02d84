//! Simulation scenarios with analytic oracles, a deterministic replication
//! engine, and coverage/size diagnostics.

mod diagnostics;
mod engine;
mod scenario;

pub use diagnostics::{conditional_coverage, hausdorff_diagnostic, GroupCoverage, HausdorffPoint};
pub use engine::{
    fit_method, fit_method_with_plan, run_replications, FittedMethod, Method, MethodSummary,
    RepReport, SimulationReport, TestPoint,
};
pub use scenario::{oracle_hpd, ResidualLaw, Scenario, ScenarioKind};
