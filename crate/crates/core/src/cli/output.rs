use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::engines::TrajectoryRecord;

/// Shortest decimal that round-trips to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

pub const RECORD_HEADER: [&str; 4] = ["substream_id", "hitting_time", "censored", "final_fraction"];

/// One output row; `hitting_time` is empty (CSV) or null (JSON) when censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecordRow {
    pub substream_id: u64,
    pub hitting_time: Option<u64>,
    pub censored: bool,
    pub final_fraction: f64,
}

impl From<&TrajectoryRecord> for RecordRow {
    fn from(r: &TrajectoryRecord) -> Self {
        Self {
            substream_id: r.substream_id,
            hitting_time: r.hitting_time.reached(),
            censored: r.censored,
            final_fraction: r.final_fraction,
        }
    }
}

pub fn records_csv(records: &[TrajectoryRecord]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER).map_err(CliError::from_csv)?;
    for r in records {
        let row = RecordRow::from(r);
        w.write_record([
            row.substream_id.to_string(),
            row.hitting_time.map(|t| t.to_string()).unwrap_or_default(),
            row.censored.to_string(),
            format_f64(row.final_fraction),
        ])
        .map_err(CliError::from_csv)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes to `path`, or to `stdout` when there is no path.
pub fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => stdout
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}
