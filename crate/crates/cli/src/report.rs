//! Trajectory serialization: JSON-Lines for the full record stream and a
//! CSV summary of the headline figures per event.
//!
//! All decimals are written in the fixed 18-fractional-digit format, so
//! repeated runs of the same scenario produce byte-identical files.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use termpool::scenario::TrajectoryRecord;

/// One JSON object per line, one line per event.
pub fn write_jsonl(records: &[TrajectoryRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Snapshot keys exported to the CSV summary, in column order.
const CSV_COLUMNS: &[&str] = &[
    "share_price",
    "share_reserves",
    "bond_reserves",
    "share_adjustment",
    "effective_share_reserves",
    "spot_price",
    "present_value",
    "lp_share_price",
    "global_exposure",
    "idle_liquidity",
];

/// One row per event: index, event name, time, then the headline figures.
/// Values are decimal strings with no commas, so no quoting is needed.
pub fn write_csv(records: &[TrajectoryRecord], path: &Path) -> Result<()> {
    let mut out = String::from("index,event,time");
    for column in CSV_COLUMNS {
        out.push(',');
        out.push_str(column);
    }
    out.push('\n');
    for record in records {
        out.push_str(&format!(
            "{},{},{}",
            record.index, record.outcome.event, record.time
        ));
        for column in CSV_COLUMNS {
            out.push(',');
            out.push_str(record.state.get(*column).map(String::as_str).unwrap_or(""));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
