use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lagonn::baselines::{InitAssignment, SasatConfig, WalksatConfig};
use lagonn::{DtPolicy, Mode, SystemConfig, TrialOptions};

#[derive(Debug, Parser)]
#[command(name = "lagonn", version, about = "Lagrange oscillator 3-SAT experiments")]
pub struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory receiving CSV, JSON summary and manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded oscillator trials on one CNF file.
    Solve(SolveArgs),
    /// Time-to-solution campaign over many instances.
    Bench(BenchArgs),
    /// Simulated annealing (SASAT) trials on one CNF file.
    Anneal(AnnealArgs),
    /// WalkSAT trials on one CNF file.
    Walksat(WalksatArgs),
    /// Median TTS as a function of the Lagrange time constant.
    SweepTau(SweepTauArgs),
    /// Median TTS as a function of the number of phase states.
    Discretize(DiscretizeArgs),
    /// Phase-copy demo on the six-node graph.
    CopyDemo(CopyDemoArgs),
    /// Write seeded random satisfiable 3-SAT instances.
    Generate(GenerateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Lagonn,
    Onn,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lagonn => Mode::Lagonn,
            ModeArg::Onn => Mode::OnnOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F64,
    F32,
}

/// Oscillator dynamics and integration settings.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OscArgs {
    #[arg(long, value_enum, default_value = "lagonn")]
    pub mode: ModeArg,
    /// Fixed time step in oscillation cycles.
    #[arg(long, default_value_t = 0.15)]
    pub dt: f64,
    /// Switch to adaptive stepping with this tolerated error (radians).
    #[arg(long)]
    pub adaptive_eps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau_lambda: f64,
    #[arg(long, default_value_t = 20.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub shil_kmax: f64,
    /// Time at which the SHIL ramp begins.
    #[arg(long, default_value_t = 0.0)]
    pub shil_start: f64,
    #[arg(long, default_value_t = 0.0)]
    pub shil_ramp: f64,
    /// Freeze the Lagrange phases from this time on.
    #[arg(long)]
    pub freeze_at: Option<f64>,
    /// Snap phases to this many levels after every step.
    #[arg(long)]
    pub nstates: Option<usize>,
    /// Stop when the largest phase velocity drops below this (0 disables).
    #[arg(long, default_value_t = 1e-6)]
    pub fixed_point_tol: f64,
    /// Keep integrating after the cost first drops below 0.125.
    #[arg(long)]
    pub no_stop_on_solve: bool,
}

impl OscArgs {
    pub fn config(&self) -> SystemConfig<f64> {
        SystemConfig {
            tau: self.tau,
            tau_lambda: self.tau_lambda,
            beta: self.beta,
            shil_k_max: self.shil_kmax,
            shil_start: self.shil_start,
            shil_ramp_time: self.shil_ramp,
            lagrange_freeze_time: self.freeze_at.unwrap_or(f64::INFINITY),
        }
    }

    pub fn options(&self, t_max: f64) -> TrialOptions<f64> {
        TrialOptions {
            mode: self.mode.into(),
            t_max,
            dt: match self.adaptive_eps {
                Some(epsilon) => DtPolicy::Adaptive { epsilon, dt0: self.dt },
                None => DtPolicy::Fixed(self.dt),
            },
            n_states: self.nstates,
            stop_on_solve: !self.no_stop_on_solve,
            fixed_point_tol: self.fixed_point_tol,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    pub cnf: PathBuf,
    #[command(flatten)]
    pub osc: OscArgs,
    #[arg(long, default_value_t = 1000.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "f64")]
    pub precision: Precision,
    /// Write the per-step trajectory (t, cost, L_T) to this CSV file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Include every phase in the trajectory file.
    #[arg(long)]
    pub trace_phases: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverArg {
    Lagonn,
    Onn,
    Sasat,
    Walksat,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SasatArgs {
    /// Annealing restarts allowed within the step budget.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_trials: u32,
    #[arg(long, default_value_t = 1.0)]
    pub max_temp: f64,
    #[arg(long, default_value_t = 0.01)]
    pub min_temp: f64,
    #[arg(long, default_value_t = 0.2)]
    pub decay_scale: f64,
    #[arg(long, value_enum, default_value = "random")]
    pub init: InitArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    Random,
    AllTrue,
}

impl SasatArgs {
    pub fn config(&self, max_steps: Option<u64>) -> SasatConfig {
        SasatConfig {
            max_trials: self.max_trials,
            max_temp: self.max_temp,
            min_temp: self.min_temp,
            decay_scale: self.decay_scale,
            max_steps,
            init: match self.init {
                InitArg::Random => InitAssignment::Random,
                InitArg::AllTrue => InitAssignment::AllTrue,
            },
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
}

impl NoiseArgs {
    pub fn config(&self, max_flips: u64) -> WalksatConfig {
        WalksatConfig {
            noise_p: self.noise,
            max_flips,
        }
    }
}

/// Budget ladder shared by the campaign commands.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LadderArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// First time budget (cycles, or steps for the discrete solvers).
    #[arg(long)]
    pub tmax0: Option<f64>,
    /// Number of budgets tried, each 4x the previous.
    #[arg(long, default_value_t = 6)]
    pub rungs: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// CNF files or directories of them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "lagonn")]
    pub solver: SolverArg,
    #[command(flatten)]
    pub ladder: LadderArgs,
    #[command(flatten)]
    pub osc: OscArgs,
    #[command(flatten)]
    pub sasat: SasatArgs,
    #[command(flatten)]
    pub walk: NoiseArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnnealArgs {
    pub cnf: PathBuf,
    #[command(flatten)]
    pub sasat: SasatArgs,
    /// Cap on attempted flips per trial.
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Write (trial, step, cost, temperature) rows to this CSV file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WalksatArgs {
    pub cnf: PathBuf,
    #[command(flatten)]
    pub walk: NoiseArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_flips: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepTauArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.25, 1.0, 4.0, 10.0])]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub ladder: LadderArgs,
    #[command(flatten)]
    pub osc: OscArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DiscretizeArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = vec![16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192]
    )]
    pub grid: Vec<usize>,
    #[command(flatten)]
    pub ladder: LadderArgs,
    #[command(flatten)]
    pub osc: OscArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopyModeArg {
    Penalty,
    Lagrange,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CopyDemoArgs {
    #[arg(long, value_enum, default_value = "lagrange")]
    pub mode: CopyModeArg,
    /// J_c in penalty mode, J_λφ in Lagrange mode.
    #[arg(long, default_value_t = 1.0)]
    pub strength: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub vars: usize,
    #[arg(long)]
    pub clauses: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Index of the first instance; file names are `<prefix><index:02>.cnf`.
    #[arg(long, default_value_t = 1)]
    pub start: usize,
    #[arg(long, default_value = "gen")]
    pub prefix: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where the CNF files go (defaults to the output directory).
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
