use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use erw_core::diagnostics::Normalization;
use erw_core::SamplerKind;

/// Elephant random walk simulation and verification lab.
#[derive(Debug, Parser)]
#[command(name = "erw", version)]
pub struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker thread cap for Monte Carlo work; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    /// File of `key = value` lines mirroring long flags; flags on the
    /// command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Exact,
    Mc,
}

impl SourceArg {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceArg::Exact => "exact",
            SourceArg::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpeedArg {
    /// `b_n = n^β`.
    Power,
    /// `b_n = (ln n)^β`.
    LogPower,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalizing sequences γ_k, a_k, v_k.
    Coeffs(CoeffsArgs),
    /// Exact law of S_n by dynamic programming.
    Exact(ExactArgs),
    /// Monte Carlo ensemble of terminal positions.
    Simulate(SimulateArgs),
    /// Normal-approximation diagnostics.
    #[command(subcommand)]
    Diag(DiagCommand),
    /// Confidence limits and coverage.
    #[command(subcommand)]
    Infer(InferCommand),
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub n: usize,
    /// Largest horizon accepted.
    #[arg(long, default_value_t = erw_core::coeffs::DEFAULT_COEFF_CAP)]
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ExactControl {
    /// Largest horizon the dynamic program accepts.
    #[arg(long, default_value_t = erw_core::exact::DEFAULT_EXACT_CAP)]
    pub cap: usize,
    /// Run past `--cap` anyway.
    #[arg(long)]
    pub allow_over_cap: bool,
    /// Rescale every layer to unit mass.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct WalkArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Report mean and variance.
    #[arg(long)]
    pub moments: bool,
    #[command(flatten)]
    pub control: ExactControl,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct McArgs {
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "markov")]
    pub sampler: SamplerKind,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long)]
    pub reps: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "markov")]
    pub sampler: SamplerKind,
    /// Also write the path of replicate 0 as `k,X_k,S_k` to this file.
    #[arg(long)]
    pub emit_path: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DiagCommand {
    /// Cramér tail ratios P(X >= x)/(1 - Φ(x)) and P(X <= -x)/Φ(-x).
    Ratio(RatioArgs),
    /// Kolmogorov distance to the normal law along a horizon grid.
    Besseen(BesseenArgs),
    /// Local limit ratios P(S_n = k)/density(k), or sup distances with --n-grid.
    Llt(LltArgs),
    /// Moderate deviation curve b_n⁻² ln P(X >= x b_n).
    Mdp(MdpArgs),
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Inclusive grid `start:stop:step`.
    #[arg(long, default_value = "0:3:0.1")]
    pub x_grid: String,
    #[arg(long, value_enum, default_value_t = SourceArg::Exact)]
    pub source: SourceArg,
    #[arg(long, default_value = "martingale")]
    pub normalization: Normalization,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub control: ExactControl,
}

#[derive(Debug, Args)]
pub struct BesseenArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Comma-separated horizons.
    #[arg(long, default_value = "100,1000,10000")]
    pub n_grid: String,
    #[arg(long, value_enum, default_value_t = SourceArg::Exact)]
    pub source: SourceArg,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub control: ExactControl,
}

#[derive(Debug, Args)]
pub struct LltArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long)]
    pub n: Option<usize>,
    /// Inclusive integer range `lo:hi`; defaults to |k| <= n^0.55.
    #[arg(long)]
    pub k_range: Option<String>,
    /// Comma-separated horizons; switches to the sup-distance trend.
    #[arg(long)]
    pub n_grid: Option<String>,
    #[command(flatten)]
    pub control: ExactControl,
}

#[derive(Debug, Args)]
pub struct MdpArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    /// Exponent of the speed sequence.
    #[arg(long, default_value_t = 0.25)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = SpeedArg::Power)]
    pub speed: SpeedArg,
    #[arg(long, default_value = "100,1000,10000")]
    pub n_grid: String,
    #[command(flatten)]
    pub control: ExactControl,
}

#[derive(Debug, Subcommand)]
pub enum InferCommand {
    /// Lower confidence limit for p from an observed S_n.
    PLower(PLowerArgs),
    /// Symmetric interval for S_n at a known p.
    Position(PositionArgs),
    /// Coverage of the lower limit for p over simulated walks.
    Coverage(CoverageArgs),
}

#[derive(Debug, Args)]
pub struct PLowerArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub s: i64,
    #[arg(long, default_value_t = 0.05)]
    pub kappa: f64,
}

#[derive(Debug, Args)]
pub struct PositionArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub kappa: f64,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Comma-separated levels; one row per level.
    #[arg(long, default_value = "0.05")]
    pub kappa: String,
    #[arg(long)]
    pub reps: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "markov")]
    pub sampler: SamplerKind,
    /// Add the exact coverage from the dynamic program.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub control: ExactControl,
}
