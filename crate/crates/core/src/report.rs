//! CSV and JSON writers for result tables.
//!
//! Every CSV file starts with a `#` comment line holding the metadata as
//! compact JSON, then the header line, then one record per line. The JSON
//! form is a single object `{"metadata": ..., "records": [...]}`.

use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::montecarlo::{BootupFit, SweepResult, TrialResult};
use crate::network::Event;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// A row of one of the output tables.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeseriesRow {
    pub trial: u64,
    pub t: u64,
    pub computational: usize,
    pub shunt: usize,
    pub total: usize,
}

impl Record for TimeseriesRow {
    const HEADER: &'static [&'static str] = &["trial", "t", "computational", "shunt", "total"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasSweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub t: u64,
    pub mean_total: f64,
    pub sd_total: f64,
    pub ci95: f64,
    pub trials: u64,
}

impl Record for BiasSweepRow {
    const HEADER: &'static [&'static str] =
        &["N", "B", "t", "mean_total", "sd_total", "ci95", "trials"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub t: u64,
    pub fraction_saturated: f64,
    pub trials: u64,
}

impl Record for SaturationRow {
    const HEADER: &'static [&'static str] = &["N", "B", "t", "fraction_saturated", "trials"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootupRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub bootup_steps: u64,
    pub trials: u64,
}

impl Record for BootupRow {
    const HEADER: &'static [&'static str] = &["N", "B", "bootup_steps", "trials"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl Record for FitRow {
    const HEADER: &'static [&'static str] = &["slope", "intercept", "r_squared", "points"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRow {
    pub t: u64,
    pub line: usize,
    pub event: &'static str,
    pub token_id: u64,
}

impl Record for EventRow {
    const HEADER: &'static [&'static str] = &["t", "line", "event", "token_id"];
}

pub fn timeseries_rows(trials: &[TrialResult]) -> Vec<TimeseriesRow> {
    trials
        .iter()
        .flat_map(|tr| {
            tr.series.iter().map(move |p| TimeseriesRow {
                trial: tr.trial,
                t: p.t,
                computational: p.computational,
                shunt: p.shunt,
                total: p.total,
            })
        })
        .collect()
}

pub fn bias_sweep_rows(sweep: &SweepResult) -> Vec<BiasSweepRow> {
    sweep
        .points
        .iter()
        .map(|p| BiasSweepRow {
            n: p.n_lines,
            b: p.bias,
            t: p.t,
            mean_total: p.mean,
            sd_total: p.sd,
            ci95: p.ci95,
            trials: sweep.trials,
        })
        .collect()
}

pub fn saturation_rows(sweep: &SweepResult) -> Vec<SaturationRow> {
    sweep
        .points
        .iter()
        .map(|p| SaturationRow {
            n: p.n_lines,
            b: p.bias,
            t: p.t,
            fraction_saturated: p.mean,
            trials: sweep.trials,
        })
        .collect()
}

pub fn fit_row(fit: &BootupFit) -> FitRow {
    FitRow {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points: fit.points.len(),
    }
}

pub fn event_rows(events: &[Event]) -> Vec<EventRow> {
    events
        .iter()
        .map(|e| EventRow {
            t: e.t,
            line: e.line,
            event: e.kind.as_str(),
            token_id: e.token_id,
        })
        .collect()
}

/// Writes `records` with a metadata comment (CSV) or field (JSON).
pub fn write_records<W: Write, R: Record>(
    mut out: W,
    format: Format,
    metadata: &serde_json::Value,
    records: &[R],
) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "# {metadata}")?;
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(out);
            w.write_record(R::HEADER)?;
            for r in records {
                w.serialize(r)?;
            }
            w.flush()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, R> {
                metadata: &'a serde_json::Value,
                records: &'a [R],
            }
            serde_json::to_writer_pretty(&mut out, &Doc { metadata, records })?;
            writeln!(out)
        }
    }
}
