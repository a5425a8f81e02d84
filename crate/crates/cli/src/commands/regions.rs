use kdehpd::conformal::RegionPredictor;
use kdehpd::sim::{fit_method, Method, Scenario};

use super::write_regions;
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_num};
use crate::RegionsArgs;

pub fn regions(args: &RegionsArgs) -> CliResult<()> {
    let s = &args.scenario;
    let kind = s.kind()?;
    let method: Method = args.method.parse()?;
    if args.grid_points < 2 || !(args.x_min < args.x_max) {
        return Err(CliError::Usage(
            "need at least two grid points over a nonempty range".into(),
        ));
    }
    let scenario = Scenario {
        kind,
        n_obs: s.n_obs,
        n_test: 0,
        alpha: s.alpha,
        seed: s.seed,
    };
    scenario.validate()?;
    let fitted = fit_method(
        method,
        &scenario.generate().0,
        s.alpha,
        kind.uses_scale_model(),
        Some(kind),
    )?;
    let step = (args.x_max - args.x_min) / (args.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..args.grid_points)
        .map(|i| args.x_min + i as f64 * step)
        .collect();
    let regions = grid
        .iter()
        .map(|&x| fitted.predict_region(&[x]))
        .collect::<kdehpd::Result<Vec<_>>>()?;
    ensure_dir(&args.outdir)?;
    write_regions(
        &args.outdir.join("regions.csv"),
        "x",
        grid.iter().map(|&x| fmt_num(x)).zip(&regions),
    )
}
