//! Measurement protocol: repeated runs per (problem, solver) pair, type-7
//! quartiles over converged runs, JSON/CSV reports and bar-chart data.
//!
//! Digital solvers are timed with a monotonic clock around their iteration
//! loop. LPU runs are never timed; their duration is the roundtrip model
//! `roundtrips × roundtrip_ns`. Every record carries a [`TimeKind`] so the two
//! cannot be confused downstream.

mod chart;
mod report;
mod stats;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use chart::{chart_data, render_svg, Bar, ChartData, ChartGroup};
pub use report::{
    emit_chart_data, emit_report, parse_csv_records, BenchReport, ReportDefaults, ReportFormat,
    TimeSemantics, SCHEMA_VERSION,
};
pub use stats::{quantile_sorted, summarize, SummaryStats, PERCENTILE_CONVENTION};

use crate::dynamics::{run, CavityParams, DynamicsError, RunConfig};
use crate::encoding::{encode, EncodingConfig};
use crate::generate::{banded_spd, random_rhs};
use crate::krylov::{solve, SolveStatus, SolverSpec};
use crate::matrix_market::read_matrix_market_path;
use crate::sparse::{relative_residual, SparseMatrix};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("runs_per_pair must be at least 1")]
    NoRuns,
    #[error("tol must be positive, got {0}")]
    Tolerance(f64),
    #[error("plan has no problems or no solvers")]
    EmptyPlan,
    #[error("cannot summarize an empty sample")]
    EmptySample,
    #[error("sample contains a non-finite time")]
    NonFiniteSample,
    #[error("report has no records")]
    NoRecords,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ProblemSource {
    /// Matrix Market file on disk (optionally gzip-compressed).
    Path { path: PathBuf },
    /// Matrix from the public sparse-matrix collection; needs a loader that
    /// can fetch.
    Collection {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
    },
    /// Generated symmetric multi-banded SPD matrix.
    Banded { n: usize, bandwidth: usize, seed: u64 },
}

impl ProblemSource {
    pub fn label(&self) -> String {
        match self {
            ProblemSource::Path { path } => path
                .file_name()
                .map(|f| {
                    let f = f.to_string_lossy();
                    f.trim_end_matches(".gz").trim_end_matches(".mtx").to_string()
                })
                .unwrap_or_else(|| path.display().to_string()),
            ProblemSource::Collection { name, .. } => name.clone(),
            ProblemSource::Banded { n, bandwidth, seed } => {
                format!("banded-n{n}-bw{bandwidth}-s{seed}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolverEntry {
    Krylov {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        spec: SolverSpec,
    },
    Lpu {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default)]
        encoding: EncodingConfig,
        #[serde(default)]
        params: CavityParams,
        #[serde(default)]
        run: RunConfig,
    },
}

impl SolverEntry {
    pub fn label(&self) -> String {
        match self {
            SolverEntry::Krylov { label: Some(l), .. } | SolverEntry::Lpu { label: Some(l), .. } => {
                l.clone()
            }
            SolverEntry::Krylov { spec, .. } => spec.kind.label(),
            SolverEntry::Lpu { run, .. } => format!("lpu-{}", run.mode.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    /// One `b` per problem, shared by every solver and run.
    #[default]
    PerProblem,
    /// A fresh `b` for every run index (still shared across solvers).
    PerRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub problems: Vec<ProblemSource>,
    pub solvers: Vec<SolverEntry>,
    #[serde(default = "default_runs")]
    pub runs_per_pair: usize,
    /// Overrides the tolerance of every solver entry.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub rhs_seed_base: u64,
    #[serde(default)]
    pub rhs_mode: RhsMode,
}

fn default_runs() -> usize {
    10
}

fn default_tol() -> f64 {
    1e-5
}

impl BenchmarkPlan {
    pub fn new(problems: Vec<ProblemSource>, solvers: Vec<SolverEntry>) -> Self {
        Self {
            problems,
            solvers,
            runs_per_pair: default_runs(),
            tol: default_tol(),
            rhs_seed_base: 0,
            rhs_mode: RhsMode::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.runs_per_pair == 0 {
            return Err(BenchError::NoRuns);
        }
        if !(self.tol > 0.0) {
            return Err(BenchError::Tolerance(self.tol));
        }
        if self.problems.is_empty() || self.solvers.is_empty() {
            return Err(BenchError::EmptyPlan);
        }
        Ok(())
    }

    pub fn rhs_seed(&self, problem_index: usize, run_index: usize) -> u64 {
        let base = self.rhs_seed_base.wrapping_add(problem_index as u64);
        match self.rhs_mode {
            RhsMode::PerProblem => base,
            RhsMode::PerRun => base.wrapping_add((run_index as u64) << 32),
        }
    }
}

pub struct LoadedProblem {
    pub name: String,
    pub matrix: SparseMatrix,
}

/// Turns a [`ProblemSource`] into a matrix.
pub trait ProblemLoader {
    fn load(&self, source: &ProblemSource) -> Result<LoadedProblem, String>;
}

/// Handles files and generated matrices; collection entries are refused.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalLoader;

impl ProblemLoader for LocalLoader {
    fn load(&self, source: &ProblemSource) -> Result<LoadedProblem, String> {
        let matrix = match source {
            ProblemSource::Path { path } => read_matrix_market_path(path)
                .map(|(m, _)| m)
                .map_err(|e| e.to_string())?,
            ProblemSource::Banded { n, bandwidth, seed } => {
                banded_spd(*n, *bandwidth, *seed).map_err(|e| e.to_string())?
            }
            ProblemSource::Collection { name, .. } => {
                return Err(format!("collection matrix '{name}' requires a fetching loader"))
            }
        };
        Ok(LoadedProblem {
            name: source.label(),
            matrix,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeKind {
    /// Monotonic wall clock around the digital iteration loop.
    WallClockApply,
    /// `roundtrips × roundtrip_ns`; no clock involved.
    RoundtripModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub run_index: usize,
    pub time_kind: TimeKind,
    pub time_ns: u64,
    pub converged: bool,
    /// `‖Ax - b‖ / ‖b‖` of the returned iterate; 1 (the zero start) when the
    /// solver failed without producing one.
    pub residual: f64,
    pub iterations_or_roundtrips: u64,
    pub rhs_seed: u64,
    /// SHA-256 of the little-endian bytes of `b`.
    pub rhs_checksum: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFailure {
    pub problem: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub problem: String,
    pub solver: String,
    pub time_kind: TimeKind,
    pub n_runs: usize,
    pub n_converged: usize,
    pub n_not_converged: usize,
    /// Absent when no run converged.
    pub stats: Option<SummaryStats>,
}

/// Solution returned by the first run of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSample {
    pub problem: String,
    pub solver: String,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<ProblemFailure>,
    pub solutions: Vec<SolutionSample>,
}

pub fn rhs_checksum(b: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in b {
        hasher.update(v.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

struct Measured {
    time_kind: TimeKind,
    time_ns: u64,
    converged: bool,
    residual: f64,
    count: u64,
    status: String,
    error: Option<String>,
    x: Option<Vec<f64>>,
}

fn measure(entry: &SolverEntry, a: &SparseMatrix, b: &[f64], tol: f64) -> Measured {
    match entry {
        SolverEntry::Krylov { spec, .. } => {
            let spec = SolverSpec { tol, ..*spec };
            match solve(a, b, &spec) {
                Ok(out) => Measured {
                    time_kind: TimeKind::WallClockApply,
                    time_ns: out.apply_time_ns,
                    converged: out.converged,
                    residual: out.final_residual,
                    count: out.iterations as u64,
                    status: status_label(out.status),
                    error: None,
                    x: Some(out.x),
                },
                Err(e) => failed(TimeKind::WallClockApply, 0, e.to_string()),
            }
        }
        SolverEntry::Lpu {
            encoding,
            params,
            run: cfg,
            ..
        } => {
            let cfg = RunConfig { tol, ..*cfg };
            let outcome = encode(a, b, encoding)
                .map_err(DynamicsError::from)
                .and_then(|problem| run(&problem, a, b, params, &cfg));
            match outcome {
                Ok(res) => Measured {
                    time_kind: TimeKind::RoundtripModel,
                    time_ns: res.time_ns,
                    converged: res.converged,
                    residual: res.final_residual,
                    count: res.roundtrips,
                    status: if res.converged {
                        "converged".into()
                    } else {
                        "max_roundtrips".into()
                    },
                    error: None,
                    x: Some(res.decoded_x),
                },
                Err(e) => {
                    let roundtrips = match e {
                        DynamicsError::Diverged { roundtrip } => roundtrip,
                        DynamicsError::RestartBudgetExhausted { roundtrips, .. } => roundtrips,
                        _ => 0,
                    };
                    let mut m = failed(
                        TimeKind::RoundtripModel,
                        roundtrips * params.roundtrip_ns,
                        e.to_string(),
                    );
                    m.count = roundtrips;
                    m
                }
            }
        }
    }
}

fn failed(time_kind: TimeKind, time_ns: u64, error: String) -> Measured {
    Measured {
        time_kind,
        time_ns,
        converged: false,
        residual: 1.0,
        count: 0,
        status: "error".into(),
        error: Some(error),
        x: None,
    }
}

fn status_label(status: SolveStatus) -> String {
    match status {
        SolveStatus::Converged => "converged".into(),
        SolveStatus::MaxIterations => "max_iterations".into(),
        SolveStatus::Diverged => "diverged".into(),
        SolveStatus::Breakdown(kind) => {
            let kind = serde_json::to_value(kind).expect("unit enum serializes");
            format!("breakdown:{}", kind.as_str().unwrap_or("unknown"))
        }
    }
}

/// Executes every (problem, solver, run) triple in plan order. Problems that
/// fail to load are listed in `failures`; solver errors become records.
pub fn run_plan(plan: &BenchmarkPlan, loader: &dyn ProblemLoader) -> Result<PlanOutcome, BenchError> {
    plan.validate()?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut solutions = Vec::new();
    for (pi, source) in plan.problems.iter().enumerate() {
        let problem = match loader.load(source) {
            Ok(p) => p,
            Err(error) => {
                failures.push(ProblemFailure {
                    problem: source.label(),
                    error,
                });
                continue;
            }
        };
        let n = match problem.matrix.ensure_square() {
            Ok(n) => n,
            Err(e) => {
                failures.push(ProblemFailure {
                    problem: problem.name,
                    error: e.to_string(),
                });
                continue;
            }
        };
        let mut rhs_cache: Option<(u64, Vec<f64>, String)> = None;
        for entry in &plan.solvers {
            let solver = entry.label();
            for run_index in 0..plan.runs_per_pair {
                let seed = plan.rhs_seed(pi, run_index);
                if rhs_cache.as_ref().map(|c| c.0) != Some(seed) {
                    let b = random_rhs(n, seed).expect("n > 0 for a validated square matrix");
                    let sum = rhs_checksum(&b);
                    rhs_cache = Some((seed, b, sum));
                }
                let (_, b, checksum) = rhs_cache.as_ref().expect("filled above");
                let m = measure(entry, &problem.matrix, b, plan.tol);
                // Recompute the residual independently of the solver's report.
                let residual = match &m.x {
                    Some(x) => relative_residual(&problem.matrix, x, b).unwrap_or(m.residual),
                    None => m.residual,
                };
                if run_index == 0 {
                    if let Some(x) = &m.x {
                        solutions.push(SolutionSample {
                            problem: problem.name.clone(),
                            solver: solver.clone(),
                            x: x.clone(),
                        });
                    }
                }
                records.push(RunRecord {
                    problem: problem.name.clone(),
                    solver: solver.clone(),
                    run_index,
                    time_kind: m.time_kind,
                    time_ns: m.time_ns,
                    converged: m.converged,
                    residual,
                    iterations_or_roundtrips: m.count,
                    rhs_seed: seed,
                    rhs_checksum: checksum.clone(),
                    status: m.status,
                    error: m.error,
                });
            }
        }
    }
    Ok(PlanOutcome {
        records,
        failures,
        solutions,
    })
}

/// Groups records by (problem, solver) in first-appearance order and
/// summarizes the converged runs of each group.
pub fn summarize_records(records: &[RunRecord]) -> Vec<PairSummary> {
    let mut order: Vec<(String, String)> = Vec::new();
    for r in records {
        let key = (r.problem.clone(), r.solver.clone());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .into_iter()
        .map(|(problem, solver)| {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.problem == problem && r.solver == solver)
                .collect();
            let times: Vec<f64> = group
                .iter()
                .filter(|r| r.converged)
                .map(|r| r.time_ns as f64)
                .collect();
            let n_converged = times.len();
            PairSummary {
                time_kind: group[0].time_kind,
                n_runs: group.len(),
                n_converged,
                n_not_converged: group.len() - n_converged,
                stats: summarize(&times).ok(),
                problem,
                solver,
            }
        })
        .collect()
}
