use serde::{Deserialize, Serialize};

use super::chart::{chart_data, render_svg};
use super::{
    summarize_records, BenchError, BenchmarkPlan, PairSummary, PlanOutcome, ProblemFailure,
    RunRecord, PERCENTILE_CONVENTION,
};
use crate::dynamics::{CavityParams, RunConfig};
use crate::encoding::EncodingConfig;
use crate::krylov::{SolverKind, SolverSpec};

pub const SCHEMA_VERSION: &str = "lpu-bench/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDefaults {
    pub encoding: EncodingConfig,
    pub cavity: CavityParams,
    pub run: RunConfig,
    pub krylov: SolverSpec,
    pub gmres_restart: usize,
}

impl Default for ReportDefaults {
    fn default() -> Self {
        Self {
            encoding: EncodingConfig::default(),
            cavity: CavityParams::default(),
            run: RunConfig::default(),
            krylov: SolverSpec::new(SolverKind::Cg),
            gmres_restart: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSemantics {
    pub wall_clock_apply: String,
    pub roundtrip_model: String,
}

impl Default for TimeSemantics {
    fn default() -> Self {
        Self {
            wall_clock_apply: "monotonic wall clock around the solver iteration loop, setup excluded"
                .into(),
            roundtrip_model: "roundtrips multiplied by the cavity roundtrip duration; not measured"
                .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: String,
    pub percentile_convention: String,
    pub time_semantics: TimeSemantics,
    pub plan: BenchmarkPlan,
    pub defaults: ReportDefaults,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<PairSummary>,
    pub failures: Vec<ProblemFailure>,
}

impl BenchReport {
    pub fn new(plan: &BenchmarkPlan, outcome: &PlanOutcome) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            percentile_convention: PERCENTILE_CONVENTION.into(),
            time_semantics: TimeSemantics::default(),
            plan: plan.clone(),
            defaults: ReportDefaults::default(),
            summaries: summarize_records(&outcome.records),
            records: outcome.records.clone(),
            failures: outcome.failures.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// JSON carries the whole report; CSV carries one row per record.
pub fn emit_report(report: &BenchReport, format: ReportFormat) -> Result<String, BenchError> {
    if report.records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)?),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &report.records {
                w.serialize(CsvRow::from(r))?;
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

/// Chart JSON plus an SVG rendering of the same bars.
pub fn emit_chart_data(summaries: &[PairSummary]) -> Result<(String, String), BenchError> {
    let chart = chart_data(summaries);
    Ok((serde_json::to_string_pretty(&chart)?, render_svg(&chart)))
}

/// Flat record shape for CSV; `error` is empty when absent.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    problem: String,
    solver: String,
    run_index: usize,
    time_kind: super::TimeKind,
    time_ns: u64,
    converged: bool,
    residual: f64,
    iterations_or_roundtrips: u64,
    rhs_seed: u64,
    rhs_checksum: String,
    status: String,
    error: String,
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        Self {
            problem: r.problem.clone(),
            solver: r.solver.clone(),
            run_index: r.run_index,
            time_kind: r.time_kind,
            time_ns: r.time_ns,
            converged: r.converged,
            residual: r.residual,
            iterations_or_roundtrips: r.iterations_or_roundtrips,
            rhs_seed: r.rhs_seed,
            rhs_checksum: r.rhs_checksum.clone(),
            status: r.status.clone(),
            error: r.error.clone().unwrap_or_default(),
        }
    }
}

pub fn parse_csv_records(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok(RunRecord {
                problem: row.problem,
                solver: row.solver,
                run_index: row.run_index,
                time_kind: row.time_kind,
                time_ns: row.time_ns,
                converged: row.converged,
                residual: row.residual,
                iterations_or_roundtrips: row.iterations_or_roundtrips,
                rhs_seed: row.rhs_seed,
                rhs_checksum: row.rhs_checksum,
                status: row.status,
                error: (!row.error.is_empty()).then_some(row.error),
            })
        })
        .collect()
}
