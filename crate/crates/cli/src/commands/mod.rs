mod evaluate;
mod generate;
mod predict;
mod regions;
mod simulate;

pub use evaluate::evaluate;
pub use generate::generate;
pub use predict::predict;
pub use regions::regions;
pub use simulate::simulate;

use std::path::Path;

use kdehpd::PredictionRegion;

use crate::error::CliResult;
use crate::io::{fmt_num, write_err, writer};

/// Writes `key,interval_index,lo,hi` records; an empty region becomes a
/// single record with blank bounds so that every key appears.
pub(crate) fn write_regions<'a>(
    path: &Path,
    key_name: &str,
    rows: impl IntoIterator<Item = (String, &'a PredictionRegion)>,
) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record([key_name, "interval_index", "lo", "hi"])
        .map_err(write_err(path))?;
    for (key, region) in rows {
        if region.is_empty() {
            w.write_record([key.as_str(), "0", "", ""])
                .map_err(write_err(path))?;
        }
        for (j, iv) in region.intervals().iter().enumerate() {
            w.write_record([key.clone(), j.to_string(), fmt_num(iv.lo), fmt_num(iv.hi)])
                .map_err(write_err(path))?;
        }
    }
    w.flush().map_err(|e| crate::error::CliError::io(path, e))
}
