//! `lpu` command line: solve, emulate, bench, fetch and info.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpu_core::dynamics::{CavityParams, DynamicsMode, Integrator, PhaseKernel, RunConfig};
use lpu_core::encoding::{EncodingConfig, Sign, SystemMode};
use thiserror::Error;

pub use commands::execute;

#[derive(Debug, Parser)]
#[command(name = "lpu", version, about = "Laser processing unit emulator and sparse solver baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve Ax = b with a digital iterative solver.
    Solve(SolveArgs),
    /// Solve Ax = b by integrating the coupled-laser dynamics.
    Emulate(EmulateArgs),
    /// Execute a benchmark plan (JSON or TOML) and write reports.
    Bench(BenchArgs),
    /// Download a matrix from the sparse-matrix collection into the cache.
    Fetch(FetchArgs),
    /// Print statistics of a matrix file or cached collection matrix.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Matrix Market file, or a collection name (`name` or `group/name`).
    #[arg(long, short = 'm')]
    pub matrix: String,
    /// Seed of the standard-normal right-hand side.
    #[arg(long, default_value_t = 0)]
    pub rhs_seed: u64,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    /// Cache directory [default: $LPU_CACHE_DIR or ~/.cache/lpu-matrices].
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Never touch the network; only cached matrices are available.
    #[arg(long, default_value_t = false)]
    pub offline: bool,
    /// Collection base URL.
    #[arg(long, default_value = lpu_collection::DEFAULT_BASE_URL)]
    pub base_url: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Cg,
    Gmres,
    Bicgstab,
    Richardson,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = SolverArg::Cg)]
    pub solver: SolverArg,
    /// Relative residual target ‖Ax - b‖/‖b‖.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    /// GMRES restart length.
    #[arg(long, default_value_t = 30)]
    pub restart: usize,
    /// Richardson step size.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Write the full outcome as JSON [default: not written].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Uniform-amplitude phase equation with the sine coupling.
    Phase,
    /// Phase equation with its small-angle (linear) coupling.
    PhaseLinear,
    /// Complex fields with gain saturation.
    FullField,
}

impl From<ModeArg> for DynamicsMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Phase => DynamicsMode::PhaseOnly(PhaseKernel::Sine),
            ModeArg::PhaseLinear => DynamicsMode::PhaseOnly(PhaseKernel::Linearized),
            ModeArg::FullField => DynamicsMode::FullField,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    /// Negate the encoded system so the flow contracts for positive spectra.
    Stabilized,
    AsWritten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Direct,
    /// Solve AᵀA x = Aᵀb instead.
    NormalEquations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Euler,
    Rk4,
}

#[derive(Debug, Args)]
pub struct EmulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Phase)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SignArg::Stabilized)]
    pub sign: SignArg,
    #[arg(long, value_enum, default_value_t = SystemArg::Direct)]
    pub system: SystemArg,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Euler)]
    pub integrator: IntegratorArg,
    /// Initial right-hand-side scale β.
    #[arg(long, default_value_t = EncodingConfig::default().beta_init)]
    pub beta: f64,
    /// Largest phase offset before β is shrunk, radians.
    #[arg(long, default_value_t = EncodingConfig::default().theta_max)]
    pub theta_max: f64,
    /// Roundtrip time τ.
    #[arg(long, default_value_t = CavityParams::default().tau)]
    pub tau: f64,
    /// Gain relaxation time τ_G, in roundtrips.
    #[arg(long, default_value_t = CavityParams::default().tau_g)]
    pub tau_g: f64,
    /// Pump strength P.
    #[arg(long, default_value_t = CavityParams::default().pump)]
    pub pump: f64,
    /// Roundtrip loss α.
    #[arg(long, default_value_t = CavityParams::default().alpha)]
    pub alpha: f64,
    /// Steady field amplitude D.
    #[arg(long, default_value_t = CavityParams::default().amplitude)]
    pub amplitude: f64,
    /// Integrator step in roundtrips; must divide one roundtrip.
    #[arg(long, default_value_t = CavityParams::default().dt)]
    pub dt: f64,
    /// Physical duration of one roundtrip in nanoseconds.
    #[arg(long, default_value_t = CavityParams::default().roundtrip_ns)]
    pub roundtrip_ns: u64,
    /// Relative residual target on the original system.
    #[arg(long, default_value_t = RunConfig::default().tol)]
    pub tol: f64,
    /// Roundtrips between residual checks.
    #[arg(long, default_value_t = RunConfig::default().check_every)]
    pub check_every: u64,
    #[arg(long, default_value_t = RunConfig::default().max_roundtrips)]
    pub max_roundtrips: u64,
    #[arg(long, default_value_t = RunConfig::default().max_restarts)]
    pub max_restarts: u32,
    /// β multiplier applied when a phase exceeds theta-max.
    #[arg(long, default_value_t = RunConfig::default().theta_shrink)]
    pub theta_shrink: f64,
    /// Disable shrinking β when the sine nonlinearity limits accuracy.
    #[arg(long, default_value_t = false)]
    pub no_adaptive_scale: bool,
    /// Write the RunResult as JSON [default: not written].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EmulateArgs {
    pub fn encoding(&self) -> EncodingConfig {
        EncodingConfig {
            theta_max: self.theta_max,
            system_mode: match self.system {
                SystemArg::Direct => SystemMode::Direct,
                SystemArg::NormalEquations => SystemMode::NormalEquations,
            },
            beta_init: self.beta,
            sign: match self.sign {
                SignArg::Stabilized => Sign::Stabilized,
                SignArg::AsWritten => Sign::AsWritten,
            },
        }
    }

    pub fn params(&self) -> CavityParams {
        CavityParams {
            tau: self.tau,
            tau_g: self.tau_g,
            pump: self.pump,
            alpha: self.alpha,
            amplitude: self.amplitude,
            dt: self.dt,
            roundtrip_ns: self.roundtrip_ns,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            mode: self.mode.into(),
            integrator: match self.integrator {
                IntegratorArg::Euler => Integrator::Euler,
                IntegratorArg::Rk4 => Integrator::Rk4,
            },
            tol: self.tol,
            check_every: self.check_every,
            max_roundtrips: self.max_roundtrips,
            max_restarts: self.max_restarts,
            theta_shrink: self.theta_shrink,
            adaptive_scale: !self.no_adaptive_scale,
            record_trace: true,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Plan file; `.toml` is read as TOML, anything else as JSON.
    #[arg(long)]
    pub plan: PathBuf,
    /// JSON report destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write one CSV row per run here [default: not written].
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write bar-chart data (JSON) here [default: not written].
    #[arg(long)]
    pub chart: Option<PathBuf>,
    /// Also write an SVG bar chart here [default: not written].
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Collection name (`name` or `group/name`).
    pub name: String,
    /// Download even when a cached copy exists.
    #[arg(long, default_value_t = false)]
    pub refetch: bool,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    /// Matrix Market file, or a collection name.
    pub matrix: String,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Network(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    /// 2 bad arguments, 3 parse error, 4 non-convergence, 5 network, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Args(_) => 2,
            CliError::Parse(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Network(_) => 5,
            CliError::Other(_) => 1,
        }
    }
}
