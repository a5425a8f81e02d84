//! `kdehpd` command-line tool: simulations, CSV fit/predict, evaluation and
//! plot-ready region traces.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kdehpd::sim::{Method, ScenarioKind};

use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "kdehpd", version, about = "Conformal HPD prediction regions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run Monte-Carlo replications of a scenario and report coverage and size.
    Simulate(SimulateArgs),
    /// Fit a method on a training CSV and write prediction regions for a test CSV.
    Predict(PredictArgs),
    /// Score stored predictions against observed responses.
    Evaluate(EvaluateArgs),
    /// Write regions over a covariate grid for one fitted scenario.
    Regions(RegionsArgs),
    /// Write the observed and test samples of one scenario replication as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// unimodal-symmetric, unimodal-skewed, bimodal, heteroscedastic or bowtie.
    #[arg(long, default_value = "unimodal-symmetric")]
    pub scenario: String,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Observed rows (training plus calibration).
    #[arg(long, default_value_t = 1000)]
    pub n_obs: usize,
}

impl ScenarioArgs {
    pub fn kind(&self) -> CliResult<ScenarioKind> {
        Ok(self.scenario.parse()?)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated method tags.
    #[arg(long, default_value = "kde-hpd,secpr,cqr,dcp,oracle")]
    pub methods: String,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 50)]
    pub n_test: usize,
    #[arg(long, default_value = ".")]
    pub outdir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "CONFORMAL_HPD_THREADS")]
    pub threads: Option<usize>,
    /// Fill the runtime column (otherwise `NA`, keeping reports reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Response column; every other training column is a covariate.
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value = "kde-hpd")]
    pub method: String,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Train a k-NN scale model on a separate fold (kde-hpd only).
    #[arg(long)]
    pub scale_model: bool,
    /// Fold fractions `train1,train2,cal` of the training rows, in file order.
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long, default_value = ".")]
    pub outdir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub target: String,
    /// Truth column whose distinct values define coverage groups.
    #[arg(long)]
    pub group_by: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value = ".")]
    pub outdir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value = "kde-hpd")]
    pub method: String,
    #[arg(long, default_value_t = 200)]
    pub grid_points: usize,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value = ".")]
    pub outdir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 50)]
    pub n_test: usize,
    #[arg(long, default_value = ".")]
    pub outdir: PathBuf,
}

pub fn parse_methods(list: &str) -> CliResult<Vec<Method>> {
    let methods: Vec<Method> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>().map_err(CliError::from))
        .collect::<CliResult<_>>()?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods given".into()));
    }
    Ok(methods)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Regions(a) => commands::regions(&a),
        Command::Generate(a) => commands::generate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
