use std::fs;
use std::io::Write;
use std::path::Path;

use lpu_collection::{Client, CollectionError, FetchPolicy, MatrixRef};
use lpu_core::bench::{
    emit_chart_data, emit_report, run_plan, BenchReport, BenchmarkPlan, LoadedProblem,
    LocalLoader, ProblemLoader, ProblemSource, ReportFormat,
};
use lpu_core::dynamics::{run, DynamicsError};
use lpu_core::encoding::{encode, EncodeError};
use lpu_core::generate::random_rhs;
use lpu_core::krylov::{solve, SolverError, SolverKind, SolverSpec};
use lpu_core::matrix_market::{read_matrix_market_path, MarketError};
use lpu_core::sparse::norm2;
use lpu_core::{MatrixMetadata, SparseMatrix};

use crate::{
    BenchArgs, CacheArgs, Cli, CliError, Command, EmulateArgs, FetchArgs, InfoArgs, SolveArgs,
    SolverArg, SourceArgs,
};

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => solve_cmd(&args, out),
        Command::Emulate(args) => emulate_cmd(&args, out),
        Command::Bench(args) => bench_cmd(&args, out),
        Command::Fetch(args) => fetch_cmd(&args, out),
        Command::Info(args) => info_cmd(&args, out),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Other(e.to_string())
}

fn market_err(e: MarketError) -> CliError {
    match e {
        MarketError::Io(io) => CliError::Other(io.to_string()),
        other => CliError::Parse(other.to_string()),
    }
}

fn collection_err(e: CollectionError) -> CliError {
    match e {
        e if e.is_network() => CliError::Network(e.to_string()),
        CollectionError::Parse(m) => market_err(m),
        e @ (CollectionError::NotFound(_)
        | CollectionError::Ambiguous { .. }
        | CollectionError::InvalidRef(_)) => CliError::Args(e.to_string()),
        e @ CollectionError::Index(_) => CliError::Parse(e.to_string()),
        e => CliError::Other(e.to_string()),
    }
}

fn encode_err(e: EncodeError) -> CliError {
    match e {
        EncodeError::Config(_) => CliError::Args(e.to_string()),
        e => CliError::Other(e.to_string()),
    }
}

fn client(cache: &CacheArgs) -> Client {
    let client = match &cache.cache_dir {
        Some(dir) => Client::new(dir),
        None => Client::from_env(),
    };
    client.with_base_url(cache.base_url.clone()).offline(cache.offline)
}

fn looks_like_file(spec: &str) -> bool {
    Path::new(spec).exists() || spec.ends_with(".mtx") || spec.ends_with(".mtx.gz")
}

fn load_matrix(spec: &str, cache: &CacheArgs) -> Result<(SparseMatrix, MatrixMetadata), CliError> {
    if looks_like_file(spec) {
        return read_matrix_market_path(spec).map_err(market_err);
    }
    let r = MatrixRef::parse(spec).map_err(collection_err)?;
    let entry = client(cache)
        .fetch(&r, FetchPolicy::CacheFirst)
        .map_err(collection_err)?;
    entry.load().map_err(collection_err)
}

fn load_system(source: &SourceArgs) -> Result<(SparseMatrix, MatrixMetadata, Vec<f64>), CliError> {
    let (a, meta) = load_matrix(&source.matrix, &source.cache)?;
    if !a.is_square() {
        return Err(CliError::Other(format!(
            "matrix is {}x{}, a square system is required",
            a.nrows(),
            a.ncols()
        )));
    }
    let b = random_rhs(a.nrows(), source.rhs_seed).map_err(|e| CliError::Other(e.to_string()))?;
    Ok((a, meta, b))
}

fn x_summary(x: &[f64]) -> String {
    let head: Vec<String> = x.iter().take(5).map(|v| format!("{v:.6e}")).collect();
    let more = if x.len() > 5 { ", ..." } else { "" };
    format!("n={} norm={:.6e} [{}{}]", x.len(), norm2(x), head.join(", "), more)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err)
}

fn solve_cmd(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (a, meta, b) = load_system(&args.source)?;
    let kind = match args.solver {
        SolverArg::Cg => SolverKind::Cg,
        SolverArg::Gmres => SolverKind::Gmres {
            restart: args.restart,
        },
        SolverArg::Bicgstab => SolverKind::Bicgstab,
        SolverArg::Richardson => SolverKind::Richardson { omega: args.omega },
    };
    let spec = SolverSpec {
        kind,
        tol: args.tol,
        max_iterations: args.max_iterations,
    };
    let outcome = solve(&a, &b, &spec).map_err(|e| match e {
        SolverError::Spec(_) => CliError::Args(e.to_string()),
        e => CliError::Other(e.to_string()),
    })?;
    let w = |e: std::io::Error| io_err(e);
    writeln!(out, "matrix: {} ({}x{}, nnz {})", meta.name, a.nrows(), a.ncols(), a.nnz()).map_err(w)?;
    writeln!(out, "solver: {}", kind.label()).map_err(w)?;
    writeln!(out, "converged: {}", outcome.converged).map_err(w)?;
    writeln!(out, "status: {:?}", outcome.status).map_err(w)?;
    writeln!(out, "iterations: {}", outcome.iterations).map_err(w)?;
    writeln!(out, "residual: {:.6e}", outcome.final_residual).map_err(w)?;
    writeln!(out, "apply_time_ns: {} (wall clock, iteration loop)", outcome.apply_time_ns).map_err(w)?;
    writeln!(out, "x: {}", x_summary(&outcome.x)).map_err(w)?;
    if let Some(path) = &args.out {
        write_json(path, &outcome)?;
    }
    if !outcome.converged {
        return Err(CliError::NotConverged(format!(
            "{} stopped with {:?} at residual {:.3e}",
            kind.label(),
            outcome.status,
            outcome.final_residual
        )));
    }
    Ok(())
}

fn emulate_cmd(args: &EmulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (a, meta, b) = load_system(&args.source)?;
    let problem = encode(&a, &b, &args.encoding()).map_err(encode_err)?;
    let params = args.params();
    let cfg = args.run_config();
    let result = run(&problem, &a, &b, &params, &cfg).map_err(|e| match e {
        DynamicsError::Diverged { .. } | DynamicsError::RestartBudgetExhausted { .. } => {
            CliError::NotConverged(e.to_string())
        }
        DynamicsError::Config(_) | DynamicsError::ModeMismatch(_) => CliError::Args(e.to_string()),
        DynamicsError::Encode(e) => encode_err(e),
        e => CliError::Other(e.to_string()),
    })?;
    let w = |e: std::io::Error| io_err(e);
    writeln!(out, "matrix: {} ({}x{}, nnz {})", meta.name, a.nrows(), a.ncols(), a.nnz()).map_err(w)?;
    writeln!(out, "mode: {}", cfg.mode.label()).map_err(w)?;
    writeln!(out, "converged: {}", result.converged).map_err(w)?;
    writeln!(out, "residual: {:.6e}", result.final_residual).map_err(w)?;
    writeln!(out, "roundtrips: {}", result.roundtrips).map_err(w)?;
    writeln!(
        out,
        "time_ns: {} (roundtrip model, {} ns per roundtrip)",
        result.time_ns, result.roundtrip_ns
    )
    .map_err(w)?;
    writeln!(out, "restarts: {}", result.restarts).map_err(w)?;
    writeln!(out, "final_beta: {:.6e}", result.final_beta).map_err(w)?;
    writeln!(out, "max_phase: {:.6e}", result.max_phase_seen).map_err(w)?;
    writeln!(out, "x: {}", x_summary(&result.decoded_x)).map_err(w)?;
    if let Some(path) = &args.out {
        write_json(path, &result)?;
    }
    if !result.converged {
        return Err(CliError::NotConverged(format!(
            "no convergence within {} roundtrips (residual {:.3e})",
            result.roundtrips, result.final_residual
        )));
    }
    Ok(())
}

struct CliLoader {
    client: Client,
}

impl ProblemLoader for CliLoader {
    fn load(&self, source: &ProblemSource) -> Result<LoadedProblem, String> {
        match source {
            ProblemSource::Collection { name, group } => {
                let r = MatrixRef::new(name.clone(), group.clone()).map_err(|e| e.to_string())?;
                let entry = self
                    .client
                    .fetch(&r, FetchPolicy::CacheFirst)
                    .map_err(|e| e.to_string())?;
                let (matrix, _) = entry.load().map_err(|e| e.to_string())?;
                Ok(LoadedProblem {
                    name: source.label(),
                    matrix,
                })
            }
            other => LocalLoader.load(other),
        }
    }
}

pub fn read_plan(path: &Path) -> Result<BenchmarkPlan, CliError> {
    let text = fs::read_to_string(path).map_err(io_err)?;
    let plan: BenchmarkPlan = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
    };
    plan.validate().map_err(|e| CliError::Args(e.to_string()))?;
    Ok(plan)
}

fn bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let plan = read_plan(&args.plan)?;
    let loader = CliLoader {
        client: client(&args.cache),
    };
    let outcome = run_plan(&plan, &loader).map_err(|e| CliError::Other(e.to_string()))?;
    for f in &outcome.failures {
        eprintln!("warning: skipped {}: {}", f.problem, f.error);
    }
    if outcome.records.is_empty() {
        return Err(CliError::Other("no problem could be loaded".into()));
    }
    let report = BenchReport::new(&plan, &outcome);
    let other = |e: lpu_core::bench::BenchError| CliError::Other(e.to_string());
    fs::write(&args.out, emit_report(&report, ReportFormat::Json).map_err(other)?).map_err(io_err)?;
    if let Some(path) = &args.csv {
        fs::write(path, emit_report(&report, ReportFormat::Csv).map_err(other)?).map_err(io_err)?;
    }
    if args.chart.is_some() || args.svg.is_some() {
        let (json, svg) = emit_chart_data(&report.summaries).map_err(other)?;
        if let Some(path) = &args.chart {
            fs::write(path, json).map_err(io_err)?;
        }
        if let Some(path) = &args.svg {
            fs::write(path, svg).map_err(io_err)?;
        }
    }
    let w = |e: std::io::Error| io_err(e);
    writeln!(out, "{:<28} {:<18} {:>6} {:>14} {:>14} {:>14}", "problem", "solver", "conv", "median_ns", "p25_ns", "p75_ns")
        .map_err(w)?;
    for s in &report.summaries {
        let (m, lo, hi) = match s.stats {
            Some(st) => (
                format!("{:.0}", st.median_ns),
                format!("{:.0}", st.p25_ns),
                format!("{:.0}", st.p75_ns),
            ),
            None => ("-".into(), "-".into(), "-".into()),
        };
        writeln!(
            out,
            "{:<28} {:<18} {:>6} {:>14} {:>14} {:>14}",
            s.problem,
            s.solver,
            format!("{}/{}", s.n_converged, s.n_runs),
            m,
            lo,
            hi
        )
        .map_err(w)?;
    }
    writeln!(out, "report: {}", args.out.display()).map_err(w)?;
    Ok(())
}

fn fetch_cmd(args: &FetchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let r = MatrixRef::parse(&args.name).map_err(collection_err)?;
    let policy = if args.refetch {
        FetchPolicy::Refetch
    } else {
        FetchPolicy::CacheFirst
    };
    let entry = client(&args.cache).fetch(&r, policy).map_err(collection_err)?;
    let (a, _) = entry.load().map_err(collection_err)?;
    let w = |e: std::io::Error| io_err(e);
    writeln!(
        out,
        "{}/{}",
        entry.matrix_ref.group.as_deref().unwrap_or("?"),
        entry.matrix_ref.name
    )
    .map_err(w)?;
    writeln!(out, "path: {}", entry.local_path.display()).map_err(w)?;
    writeln!(out, "sha256: {}", entry.checksum).map_err(w)?;
    writeln!(out, "size: {}x{}", a.nrows(), a.ncols()).map_err(w)?;
    writeln!(out, "nnz: {}", a.nnz()).map_err(w)?;
    Ok(())
}

fn info_cmd(args: &InfoArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (a, meta) = load_matrix(&args.matrix, &args.cache)?;
    let offsets = a.band_offsets();
    let bandwidth = offsets.iter().map(|d| d.unsigned_abs()).max().unwrap_or(0);
    let w = |e: std::io::Error| io_err(e);
    writeln!(out, "name: {}", meta.name).map_err(w)?;
    writeln!(out, "size: {}x{}", a.nrows(), a.ncols()).map_err(w)?;
    writeln!(out, "nnz: {}", a.nnz()).map_err(w)?;
    writeln!(out, "storage: {:?} ({} file entries)", meta.symmetry, meta.file_entries).map_err(w)?;
    writeln!(out, "numerically_symmetric: {}", a.is_symmetric()).map_err(w)?;
    writeln!(out, "diagonals: {} (bandwidth {})", offsets.len(), bandwidth).map_err(w)?;
    writeln!(out, "max_row_abs_sum: {:.6e}", a.max_row_abs_sum()).map_err(w)?;
    Ok(())
}
