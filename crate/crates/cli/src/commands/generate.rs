use std::path::Path;

use kdehpd::data::Dataset;
use kdehpd::sim::Scenario;

use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_num, write_err, writer};
use crate::GenerateArgs;

fn write_xy(path: &Path, d: &Dataset) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "y"]).map_err(write_err(path))?;
    for (x, &y) in d.rows().zip(d.y()) {
        w.write_record([fmt_num(x[0]), fmt_num(y)])
            .map_err(write_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `train.csv` holds the observed sample and `test.csv` the test sample of
/// the replication that `simulate` runs first for the same seed.
pub fn generate(args: &GenerateArgs) -> CliResult<()> {
    let s = &args.scenario;
    let scenario = Scenario {
        kind: s.kind()?,
        n_obs: s.n_obs,
        n_test: args.n_test,
        alpha: s.alpha,
        seed: s.seed,
    };
    scenario.validate()?;
    let (observed, test) = scenario.generate();
    ensure_dir(&args.outdir)?;
    write_xy(&args.outdir.join("train.csv"), &observed)?;
    write_xy(&args.outdir.join("test.csv"), &test)
}
