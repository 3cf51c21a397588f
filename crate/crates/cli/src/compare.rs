use monise_core::metrics::reference_point;
use serde::Serialize;

use crate::error::CliError;
use crate::report::{evaluate_hypervolume, RunReport};

/// Seed for Monte-Carlo comparisons, fixed so row values do not depend on
/// report order.
pub const COMPARE_SEED: u64 = 0;

pub const COLUMNS: [&str; 5] = ["algorithm", "m", "solutions", "hypervolume", "seconds"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub m: usize,
    pub solutions: usize,
    pub hypervolume: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub reference: Vec<f64>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// Comma-separated table with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        out.write_record(COLUMNS).expect("in-memory write");
        for row in &self.rows {
            out.serialize(row).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

/// Hypervolume of every report against one reference point taken from the
/// union of their fronts.
pub fn compare_runs(reports: &[RunReport]) -> Result<ComparisonTable, CliError> {
    let Some(first) = reports.first() else {
        return Err(CliError::Usage("compare needs at least one report".into()));
    };
    if let Some(other) = reports
        .iter()
        .find(|r| r.instance_sha256 != first.instance_sha256)
    {
        return Err(CliError::InstanceMismatch(
            first.instance_sha256.clone(),
            other.instance_sha256.clone(),
        ));
    }
    let fronts: Vec<Vec<Vec<f64>>> = reports.iter().map(RunReport::points).collect();
    let reference = reference_point(&fronts).map_err(|e| CliError::Usage(e.to_string()))?;
    let samples = reports
        .iter()
        .map(|r| r.config.hv_samples)
        .max()
        .unwrap_or(1);
    let mut rows = Vec::with_capacity(reports.len());
    for (report, front) in reports.iter().zip(&fronts) {
        let hv = evaluate_hypervolume(front, &reference, samples, COMPARE_SEED)?;
        rows.push(ComparisonRow {
            algorithm: report.config.algorithm.to_string(),
            m: report.num_objectives,
            solutions: report.solutions.len(),
            hypervolume: hv.value,
            seconds: report.timing.total_seconds,
        });
    }
    Ok(ComparisonTable { reference, rows })
}
