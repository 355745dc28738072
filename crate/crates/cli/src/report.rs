use std::path::Path;

use robustscan_core::metrics::{aggregate, render_report, AccuracyRecord, ReportFormat};

use crate::error::CliError;

/// Reads a record file holding either one record or an array of them.
pub fn load_records(path: &Path) -> Result<Vec<AccuracyRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    Ok(if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    })
}

/// Picks the baseline: a record file if `name_or_path` is one, otherwise the
/// loaded record with that model name.
pub fn find_baseline(records: &[AccuracyRecord], name_or_path: &str) -> Result<AccuracyRecord, CliError> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        return load_records(path)?
            .into_iter()
            .next()
            .ok_or_else(|| CliError::Config(format!("{name_or_path} holds no records")));
    }
    records
        .iter()
        .find(|r| r.model == name_or_path)
        .cloned()
        .ok_or_else(|| CliError::Config(format!("no record for baseline model {name_or_path:?}")))
}

pub fn cmd_report(records: &[AccuracyRecord], baseline: &AccuracyRecord, format: ReportFormat) -> Result<Vec<u8>, CliError> {
    let reports = aggregate(records, baseline)?;
    Ok(render_report(&reports, format))
}
