use kdehpd::conformal::RegionPredictor;
use kdehpd::data::{SplitFractions, SplitPlan};
use kdehpd::sim::{fit_method_with_plan, Method};

use super::write_regions;
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, read_numeric, to_dataset};
use crate::PredictArgs;

fn parse_split(s: &str) -> CliResult<SplitFractions> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad split fraction '{p}'")))
        })
        .collect::<CliResult<_>>()?;
    let [train1, train2, cal] = parts[..] else {
        return Err(CliError::Usage(format!(
            "--split needs three fractions, got '{s}'"
        )));
    };
    let f = SplitFractions {
        train1,
        train2,
        cal,
    };
    f.validate()?;
    Ok(f)
}

pub fn predict(args: &PredictArgs) -> CliResult<()> {
    let method: Method = args.method.parse()?;
    let train_table = read_numeric(&args.train)?;
    if train_table.column(&args.target).is_none() {
        return Err(CliError::Usage(format!(
            "{}: target column '{}' missing",
            args.train.display(),
            args.target
        )));
    }
    let covariates: Vec<String> = train_table
        .headers
        .iter()
        .filter(|h| **h != args.target)
        .cloned()
        .collect();
    if covariates.is_empty() {
        return Err(CliError::Usage(
            "training data has no covariate columns".into(),
        ));
    }
    let train = to_dataset(&train_table, &covariates, Some(&args.target), &args.train)?;
    let test_table = read_numeric(&args.test)?;
    let test = to_dataset(&test_table, &covariates, None, &args.test)?;

    let fractions = match &args.split {
        Some(s) => parse_split(s)?,
        None => method.split_fractions(args.scale_model),
    };
    if args.scale_model && !matches!(method, Method::KdeHpd | Method::KdeHpdScaled) {
        return Err(CliError::Usage(
            "--scale-model applies to kde-hpd only".into(),
        ));
    }
    let plan = SplitPlan::contiguous(train.len(), fractions)?;
    let fitted = fit_method_with_plan(method, &train, &plan, args.alpha, args.scale_model, None)?;
    let regions = fitted.predict_regions(&test)?;

    ensure_dir(&args.outdir)?;
    write_regions(
        &args.outdir.join("predictions.csv"),
        "row",
        regions.iter().enumerate().map(|(i, r)| (i.to_string(), r)),
    )
}
