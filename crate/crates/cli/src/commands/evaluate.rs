use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_num, parse_num, reader, write_err, writer};
use crate::{EvaluateArgs, Format};

#[derive(Debug, Serialize)]
struct Metrics {
    group: String,
    n: usize,
    coverage: f64,
    mean_size: f64,
    median_size: f64,
}

fn metrics(group: String, pts: &[(bool, f64)]) -> Metrics {
    let n = pts.len();
    let mut sizes: Vec<f64> = pts.iter().map(|p| p.1).collect();
    sizes.sort_by(f64::total_cmp);
    let median_size = if n % 2 == 1 {
        sizes[n / 2]
    } else {
        0.5 * (sizes[n / 2 - 1] + sizes[n / 2])
    };
    Metrics {
        group,
        n,
        coverage: pts.iter().filter(|p| p.0).count() as f64 / n as f64,
        mean_size: sizes.iter().sum::<f64>() / n as f64,
        median_size,
    }
}

/// Intervals per prediction row; blank bounds denote an empty region.
fn read_predictions(args: &EvaluateArgs) -> CliResult<BTreeMap<usize, Vec<(f64, f64)>>> {
    let path = &args.predictions;
    let usage = |m: String| CliError::Usage(format!("{}: {m}", path.display()));
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| usage(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["row", "interval_index", "lo", "hi"] {
        return Err(usage("expected columns row,interval_index,lo,hi".into()));
    }
    let mut out: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| usage(e.to_string()))?;
        let line = i + 1;
        let row: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| usage(format!("record {line}: bad row key '{}'", &rec[0])))?;
        let entry = out.entry(row).or_default();
        if rec[2].trim().is_empty() && rec[3].trim().is_empty() {
            continue;
        }
        let lo = parse_num(&rec[2])
            .ok_or_else(|| usage(format!("record {line}: bad lower bound '{}'", &rec[2])))?;
        let hi = parse_num(&rec[3])
            .ok_or_else(|| usage(format!("record {line}: bad upper bound '{}'", &rec[3])))?;
        if lo > hi {
            return Err(usage(format!(
                "record {line}: lower bound exceeds upper bound"
            )));
        }
        entry.push((lo, hi));
    }
    Ok(out)
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let preds = read_predictions(args)?;
    let path = &args.truth;
    let usage = |m: String| CliError::Usage(format!("{}: {m}", path.display()));
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| usage(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| usage(format!("column '{name}' missing")))
    };
    let t = col(&args.target)?;
    let g = args.group_by.as_deref().map(col).transpose()?;

    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| usage(e.to_string()))?;
        let y: f64 = rec[t].trim().parse().map_err(|_| {
            usage(format!(
                "row {}, column '{}': not a number: '{}'",
                i + 1,
                args.target,
                &rec[t]
            ))
        })?;
        let ivs = preds.get(&i).ok_or_else(|| {
            CliError::Usage(format!(
                "no prediction for truth row {i} in {}",
                args.predictions.display()
            ))
        })?;
        let covered = ivs.iter().any(|&(lo, hi)| lo <= y && y <= hi);
        points.push((covered, ivs.iter().map(|&(lo, hi)| hi - lo).sum::<f64>()));
        if let Some(g) = g {
            labels.push(rec[g].trim().to_owned());
        }
    }
    if points.is_empty() {
        return Err(usage("no truth rows".into()));
    }
    if preds.len() != points.len() {
        return Err(CliError::Usage(format!(
            "row mismatch: {} prediction rows for {} truth rows",
            preds.len(),
            points.len()
        )));
    }

    let mut out = vec![metrics("all".into(), &points)];
    if g.is_some() {
        let mut groups: BTreeMap<&str, Vec<(bool, f64)>> = BTreeMap::new();
        for (label, p) in labels.iter().zip(&points) {
            groups.entry(label).or_default().push(*p);
        }
        out.extend(
            groups
                .into_iter()
                .map(|(label, pts)| metrics(label.to_owned(), &pts)),
        );
    }

    ensure_dir(&args.outdir)?;
    match args.format {
        Format::Csv => {
            let p = args.outdir.join("metrics.csv");
            let mut w = writer(&p)?;
            w.write_record(["group", "n", "coverage", "mean_size", "median_size"])
                .map_err(write_err(&p))?;
            for m in &out {
                w.write_record([
                    m.group.clone(),
                    m.n.to_string(),
                    fmt_num(m.coverage),
                    fmt_num(m.mean_size),
                    fmt_num(m.median_size),
                ])
                .map_err(write_err(&p))?;
            }
            w.flush().map_err(|e| CliError::io(&p, e))?;
        }
        Format::Json => {
            let p = args.outdir.join("metrics.json");
            let text = serde_json::to_string_pretty(&out).map_err(|e| CliError::io(&p, e))?;
            std::fs::write(&p, text + "\n").map_err(|e| CliError::io(&p, e))?;
        }
    }
    Ok(())
}
