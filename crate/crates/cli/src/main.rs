//! `qmarg`: build quantum states with prescribed marginals from the command line.
//!
//! Subsystem indices on the command line are one-based. Exit codes: 0 on
//! success, 1 on input or validation errors, 2 when a solver stops without
//! converging.

mod commands;
mod io;
mod marginals;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmarg_core::{NspgOptions, SolveOptions};

use marginals::{parse_dims, parse_keep, parse_marginal, IndexList, MarginalArg};

#[derive(Parser, Debug)]
#[command(
    name = "qmarg",
    version,
    about = "Quantum states with prescribed marginals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partial trace of a matrix file onto the kept subsystems.
    Trace(TraceArgs),
    /// Check that the marginals agree on every overlap.
    Consistency(ConsistencyArgs),
    /// Project a matrix onto the marginal set, or onto the states in it.
    Project(ProjectArgs),
    /// Iterative solvers.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Direct bipartite constructions.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Validate a solution file.
    Verify(VerifyArgs),
    /// Seeded random test inputs.
    #[command(subcommand)]
    Random(RandomCommand),
}

#[derive(Args, Debug)]
struct MarginalFlags {
    /// Target reduced state as `<keep>:<file>`, e.g. `2,3:rho.json`. Repeatable.
    #[arg(long = "marginal", value_name = "KEEP:FILE", value_parser = parse_marginal, required = true)]
    marginals: Vec<MarginalArg>,
    /// Subsystem dimensions, e.g. `2,2,2`. Inferred from the marginal files when omitted.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<IndexList>,
}

#[derive(Args, Debug)]
struct SolverFlags {
    /// Residual tolerance on the marginals.
    #[arg(long, default_value_t = SolveOptions::default().tolerance)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = SolveOptions::default().max_iterations)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent runs with seeds `seed, seed + 1, …`, run concurrently.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Directory for `solution.json` and `report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Dykstra,
    Plain,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InnerArg {
    Newton,
    Dykstra,
}

/// `random`, `greedy`, `interlace` or `file:<path>`.
#[derive(Clone, Debug)]
enum InitArg {
    Random,
    Greedy,
    Interlace,
    File(PathBuf),
}

fn parse_init(s: &str) -> Result<InitArg, String> {
    match s {
        "random" => Ok(InitArg::Random),
        "greedy" => Ok(InitArg::Greedy),
        "interlace" => Ok(InitArg::Interlace),
        _ => s
            .strip_prefix("file:")
            .filter(|p| !p.is_empty())
            .map(|p| InitArg::File(PathBuf::from(p)))
            .ok_or_else(|| format!("unknown start point `{s}`")),
    }
}

#[derive(Args, Debug)]
struct TraceArgs {
    input: PathBuf,
    /// Kept subsystems, e.g. `2,3`.
    #[arg(long, value_parser = parse_keep)]
    keep: IndexList,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConsistencyArgs {
    #[command(flatten)]
    marginals: MarginalFlags,
    #[arg(long, default_value_t = commands::CONSISTENCY_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    input: PathBuf,
    #[command(flatten)]
    marginals: MarginalFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Project onto the affine marginal set only, dropping positivity.
    #[arg(long)]
    affine: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Dykstra)]
    mode: ModeArg,
}

#[derive(Subcommand, Debug)]
enum SolveCommand {
    /// Alternating projections with a prescribed spectrum.
    Spectrum {
        #[command(flatten)]
        marginals: MarginalFlags,
        #[command(flatten)]
        solver: SolverFlags,
        /// Value-list file with the eigenvalues; rescaled to unit sum.
        #[arg(long)]
        spectrum: PathBuf,
    },
    /// Alternating projections with a rank cap.
    Rank {
        #[command(flatten)]
        marginals: MarginalFlags,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        cap: usize,
        #[arg(long, value_parser = parse_init, default_value = "random")]
        init: InitArg,
    },
    /// Alternating projections with the PSD cone.
    Feasible {
        #[command(flatten)]
        marginals: MarginalFlags,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Nonmonotone spectral projected gradient on `tr ρ ln ρ`, or on `−S_α`
    /// with `--alpha`.
    MinEntropy {
        #[command(flatten)]
        marginals: MarginalFlags,
        #[command(flatten)]
        solver: SolverFlags,
        /// Rényi order; von Neumann when omitted.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_parser = parse_init, default_value = "random")]
        init: InitArg,
        #[arg(long = "stationarity-tol", default_value_t = NspgOptions::default().stationarity_tol)]
        stationarity_tol: f64,
        #[arg(long, default_value_t = NspgOptions::default().window)]
        window: usize,
        #[arg(long, value_enum, default_value_t = InnerArg::Newton)]
        inner: InnerArg,
    },
}

#[derive(Args, Debug)]
struct ConstructFlags {
    /// `1:<file>` and `2:<file>`.
    #[arg(long = "marginal", value_name = "KEEP:FILE", value_parser = parse_marginal, required = true)]
    marginals: Vec<MarginalArg>,
    /// Directory for `solution.json` and `report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ConstructCommand {
    /// Pure state for isospectral marginals.
    Pure(ConstructFlags),
    /// Rank-`k` state from roots-of-unity phases.
    RankK {
        #[command(flatten)]
        flags: ConstructFlags,
        #[arg(long)]
        k: usize,
    },
    /// Rank-`k` state for any admissible `k`.
    Sweep {
        #[command(flatten)]
        flags: ConstructFlags,
        #[arg(long)]
        k: usize,
    },
    /// Interlacing decomposition.
    Interlace(ConstructFlags),
    /// Greedy min-matching decomposition.
    Greedy(ConstructFlags),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    input: PathBuf,
    #[arg(long = "marginal", value_name = "KEEP:FILE", value_parser = parse_marginal)]
    marginals: Vec<MarginalArg>,
    /// Optional value-list file the eigenvalues must match.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    #[arg(long, default_value_t = commands::VERIFY_TOL)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum RandomCommand {
    /// Haar unitary of order `n`.
    Unitary {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// `U diag(p) U*` on the given dimensions.
    Density {
        #[arg(long, value_parser = parse_dims)]
        dims: IndexList,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniform probability vector of length `n`.
    Probvec {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
