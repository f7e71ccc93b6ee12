//! `multipeak`: generate set systems and disjointness inputs, build auction
//! instances, solve them, and report gaps and verification results.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 invalid input,
//! 3 guard exceeded.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multipeak::rational::{self, Rational};
use serde::Serialize;

use crate::error::CliError;

fn parse_rational(text: &str) -> Result<Rational, String> {
    rational::parse(text).map_err(|e| e.to_string())
}

#[derive(Parser)]
#[command(name = "multipeak", version, about = "Multi-peak submodular gap instances")]
struct Cli {
    /// Omit wall-clock fields so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random partition family and verify its intersection bounds.
    GenSetsystem(GenSetsystemArgs),
    /// Generate a YES or NO set-disjointness input.
    GenDisjointness(GenDisjointnessArgs),
    /// Build a welfare, max-min or public-project instance.
    BuildInstance(BuildInstanceArgs),
    /// Validate a cover system document.
    IngestCover(IngestCoverArgs),
    /// Solve an instance exactly or greedily.
    Solve(SolveArgs),
    /// Answer one demand query exactly.
    DemandQuery(DemandQueryArgs),
    /// YES value, NO bound and their ratio.
    GapReport(GapReportArgs),
    /// Monotonicity, submodularity, uniqueness and boundary checks.
    Check(CheckArgs),
}

#[derive(Args, Serialize)]
pub struct GenSetsystemArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub t: usize,
    /// Nominal slack the family is checked against.
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest union size ℓ to check (default min(k, 3)).
    #[arg(long)]
    pub union_ell: Option<usize>,
    #[arg(long, default_value_t = 20_000)]
    pub union_samples: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseArg {
    Yes,
    No,
}

#[derive(Args, Serialize)]
pub struct GenDisjointnessArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long = "case", value_enum)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 1)]
    pub ones_per_player: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveArg {
    Welfare,
    Maxmin,
    Cpp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    PerPlayer,
    SharedFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetArg {
    /// a = 1/(2s), b = (1+ε)s/k.
    Communication,
    /// a = 2/(3s), b = (1/2 + 2ε)s.
    TwoPlayer,
    /// a = 1/(2s), b = εs.
    Cover,
}

#[derive(Args, Serialize)]
pub struct BuildInstanceArgs {
    /// Partition family JSON (with --disjointness).
    #[arg(long, requires = "disjointness", conflicts_with = "cover")]
    pub family: Option<PathBuf>,
    #[arg(long, requires = "family")]
    pub disjointness: Option<PathBuf>,
    /// Cover system JSON, used instead of a family.
    #[arg(long)]
    pub cover: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "welfare")]
    pub objective: ObjectiveArg,
    /// Defaults to shared-first for public projects, per-player otherwise.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Defaults to communication for families and cover for cover systems.
    #[arg(long, value_enum)]
    pub params: Option<PresetArg>,
    /// Slack for the parameter preset (defaults to the input's own).
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_opt")]
    pub epsilon: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_opt")]
    pub a: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_opt")]
    pub b: Option<Rational>,
    /// a·s; must agree with --a when both are given.
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_opt")]
    pub alpha: Option<Rational>,
    /// b/s; must agree with --b when both are given.
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_opt")]
    pub beta: Option<Rational>,
    /// Public-project cardinality (defaults to s).
    #[arg(long)]
    pub cardinality: Option<usize>,
    #[arg(long)]
    pub collection_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct IngestCoverArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverArg {
    Brute,
    Greedy,
}

#[derive(Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "brute")]
    pub solver: SolverArg,
    /// Largest search space brute force may enumerate.
    #[arg(long, default_value_t = multipeak::solvers::DEFAULT_GUARD)]
    pub guard: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct DemandQueryArgs {
    /// Valuation JSON.
    #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
    pub valuation: Option<PathBuf>,
    /// Instance JSON (with --player).
    #[arg(long, requires = "player")]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub player: Option<usize>,
    /// Price vector JSON `{"prices": ["p/q", ..]}`.
    #[arg(long, conflicts_with = "price", required_unless_present = "price")]
    pub prices: Option<PathBuf>,
    /// Comma-separated prices.
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_vec")]
    pub price: Vec<Rational>,
    /// Also enumerate every bundle and fail if the answers differ.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapObjectiveArg {
    Welfare,
    Cpp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetArg {
    OneMinusHalfInvE,
    SeventeenEighteenths,
    ThreeQuarters,
    SevenEighths,
    OneMinusInvE,
}

#[derive(Args, Serialize)]
pub struct GapReportArgs {
    #[arg(long, value_enum, default_value = "welfare")]
    pub objective: GapObjectiveArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_opt")]
    pub alpha: Option<Rational>,
    /// Defaults to ε.
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_opt")]
    pub beta: Option<Rational>,
    #[arg(long, default_value = "0", value_parser = parse_rational)]
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    /// With --a/--b: α = a·s, β = b/s.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, value_parser = parse_rational, requires = "s")]
    #[serde(with = "rational::serde_str_opt")]
    pub a: Option<Rational>,
    #[arg(long, value_parser = parse_rational, requires = "s")]
    #[serde(with = "rational::serde_str_opt")]
    pub b: Option<Rational>,
    #[arg(long, value_enum)]
    pub target: Option<TargetArg>,
    /// Brute-force these instances as well, when within the guard.
    #[arg(long)]
    pub yes_instance: Option<PathBuf>,
    #[arg(long)]
    pub no_instance: Option<PathBuf>,
    #[arg(long, default_value_t = multipeak::solvers::DEFAULT_GUARD)]
    pub guard: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct CheckArgs {
    #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
    pub valuation: Option<PathBuf>,
    /// Check every player of an instance (or only --player).
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, requires = "instance")]
    pub player: Option<usize>,
    /// Largest ground set checked exhaustively; larger ones are sampled.
    #[arg(long, default_value_t = multipeak::verify::EXHAUSTIVE_LIMIT)]
    pub exhaustive_limit: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Boundary points sampled per peak.
    #[arg(long, default_value_t = 200)]
    pub boundary_trials: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stamp = !cli.no_timestamp;
    let result: Result<(), CliError> = match &cli.command {
        Command::GenSetsystem(a) => commands::gen_setsystem(a, stamp),
        Command::GenDisjointness(a) => commands::gen_disjointness(a),
        Command::BuildInstance(a) => commands::build_instance(a),
        Command::IngestCover(a) => commands::ingest_cover(a, stamp),
        Command::Solve(a) => commands::solve(a, stamp),
        Command::DemandQuery(a) => commands::demand_query(a, stamp),
        Command::GapReport(a) => commands::gap_report(a, stamp),
        Command::Check(a) => commands::check(a, stamp),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("multipeak: {e}");
            e.exit_code()
        }
    }
}
