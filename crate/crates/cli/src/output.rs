use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use structsum_core::pipeline::RunReport;
use structsum_core::report::{EvalReport, METRIC_NAMES};
use structsum_core::structure::PatternDistribution;

/// Id used for the aggregate row of CSV reports.
pub const AGGREGATE_ROW: &str = "__aggregate__";

pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(String::from_utf8(bytes)?)
}

fn report_rows(writer: &mut csv::Writer<Vec<u8>>, system: Option<&str>, report: &EvalReport) -> Result<()> {
    for record in &report.per_record {
        let mut row: Vec<String> = system.map(String::from).into_iter().collect();
        row.push(record.id.clone());
        row.extend(METRIC_NAMES.iter().map(|m| cell(record.metric(m))));
        writer.write_record(&row)?;
    }
    let mut row: Vec<String> = system.map(String::from).into_iter().collect();
    row.push(AGGREGATE_ROW.to_string());
    row.extend(METRIC_NAMES.iter().map(|m| cell(report.aggregate.metric(m))));
    writer.write_record(&row)?;
    Ok(())
}

/// One row per record plus an aggregate row; columns use the dotted metric
/// names accepted by `compare --metric`. Absent optional metrics are empty.
pub fn eval_csv(report: &EvalReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(std::iter::once("id").chain(METRIC_NAMES))?;
    report_rows(&mut writer, None, report)?;
    finish(writer)
}

pub fn run_csv(report: &RunReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["system", "id"].into_iter().chain(METRIC_NAMES))?;
    for system in &report.systems {
        report_rows(&mut writer, Some(system.system.name()), &system.report)?;
    }
    finish(writer)
}

pub fn distribution_csv(dist: &PatternDistribution) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["pattern", "count", "share"])?;
    for entry in &dist.patterns {
        writer.write_record([entry.pattern.clone(), entry.count.to_string(), entry.share.to_string()])?;
    }
    finish(writer)
}
