//! Subcommand implementations.

use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use qmarg_core::constructive::{
    greedy_minmatch, interlace_decomposition, pure_state_from_isospectral, rank_k_roots_of_unity,
    rank_sweep,
};
use qmarg_core::projections::{check_consistency, AffineProjector, DEFAULT_CONSISTENCY_TOL};
use qmarg_core::solvers::{
    dykstra_project, nspg_minimize, nspg_minimize_from, solve_feasible, solve_with_rank_cap,
    solve_with_rank_cap_from, solve_with_spectrum,
};
use qmarg_core::tensorcore::{
    partial_trace, random_density, random_probability_vector, random_unitary,
};
use qmarg_core::{
    ConstraintSet, DensityMatrix, DykstraMode, HermitianMatrix, InnerProjection, KeepSet,
    MarginalConstraint, NspgOptions, Objective, SolveOptions, SolveReport, SystemDims,
};
use serde::Serialize;

use crate::io::{matrix_json, read_hermitian, read_matrix, read_spectrum, write_json, ValuesFile};
use crate::marginals::{bipartite_pair, constraint_set, load, MarginalArg};
use crate::report::{emit_construction, emit_run, Diagnostics, RunSummary};
use crate::{
    Command, ConstructCommand, InitArg, InnerArg, MarginalFlags, ModeArg, RandomCommand,
    SolveCommand, SolverFlags,
};

pub const CONSISTENCY_TOL: f64 = DEFAULT_CONSISTENCY_TOL;
pub const VERIFY_TOL: f64 = 1e-10;
/// Start points read from files must meet the marginals this closely.
pub const START_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    NotConverged,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Success => ExitCode::SUCCESS,
            Status::NotConverged => ExitCode::from(2),
        }
    }
}

fn converged(rep: &SolveReport) -> Status {
    if rep.converged {
        Status::Success
    } else {
        eprintln!(
            "did not converge after {} iterations (residual {:.3e})",
            rep.iterations,
            rep.final_residual()
        );
        Status::NotConverged
    }
}

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Trace(a) => trace(&a.input, &a.keep.0, a.out.as_deref()),
        Command::Consistency(a) => consistency(&a.marginals, a.tol),
        Command::Project(a) => project(
            &a.input,
            &a.marginals,
            &a.solver,
            a.affine,
            match a.mode {
                ModeArg::Dykstra => DykstraMode::WithIncrements,
                ModeArg::Plain => DykstraMode::Plain,
            },
        ),
        Command::Solve(s) => solve(s),
        Command::Construct(c) => construct(c),
        Command::Verify(a) => verify(&a.input, &a.marginals, a.spectrum.as_deref(), a.tol),
        Command::Random(r) => random(r),
    }
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn trace(input: &Path, keep: &[usize], out: Option<&Path>) -> Result<Status> {
    let (dims, x) = read_hermitian(input)?;
    let keep = KeepSet::from_one_based(keep)?;
    let reduced = partial_trace(&x, &dims, &keep)?;
    emit_text(
        &matrix_json(&dims.restrict(&keep)?, reduced.as_matrix())?,
        out,
    )?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct DerivedMarginal {
    keep: Vec<usize>,
    dims: Vec<usize>,
    entries: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ConsistencyOutput {
    consistent: bool,
    max_discrepancy: f64,
    derived_marginals: Vec<DerivedMarginal>,
}

/// Prints the consistency report; fails unless the marginals are consistent.
fn require_consistent(cs: &ConstraintSet, tol: f64) -> Result<()> {
    let report = check_consistency(cs, tol);
    if report.consistent {
        return Ok(());
    }
    print_consistency(cs, tol)?;
    bail!(
        "inconsistent marginals (max discrepancy {:.3e})",
        report.max_discrepancy
    )
}

fn print_consistency(cs: &ConstraintSet, tol: f64) -> Result<bool> {
    let report = check_consistency(cs, tol);
    let derived_marginals = report
        .derived_marginals
        .iter()
        .map(|(keep, m)| {
            let file =
                crate::io::MatrixFile::from_matrix(&cs.dims().restrict(keep)?, m.as_matrix());
            Ok(DerivedMarginal {
                keep: keep.iter().map(|i| i + 1).collect(),
                dims: file.dims,
                entries: file.entries,
            })
        })
        .collect::<Result<_>>()?;
    let output = ConsistencyOutput {
        consistent: report.consistent,
        max_discrepancy: report.max_discrepancy,
        derived_marginals,
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(report.consistent)
}

fn consistency(flags: &MarginalFlags, tol: f64) -> Result<Status> {
    let cs = constraint_set(&flags.marginals, flags.dims.as_ref())?;
    if !print_consistency(&cs, tol)? {
        bail!("inconsistent marginals");
    }
    Ok(Status::Success)
}

fn solve_options(flags: &SolverFlags) -> SolveOptions {
    SolveOptions {
        max_iterations: flags.max_iter,
        tolerance: flags.tol,
        seed: flags.seed,
        restarts: flags.restarts,
        ..SolveOptions::default()
    }
}

fn load_problem(flags: &MarginalFlags) -> Result<ConstraintSet> {
    let cs = constraint_set(&flags.marginals, flags.dims.as_ref())?;
    require_consistent(&cs, CONSISTENCY_TOL)?;
    Ok(cs)
}

fn read_start(path: &Path, cs: &ConstraintSet) -> Result<HermitianMatrix> {
    let (dims, x) = read_hermitian(path)?;
    ensure!(
        &dims == cs.dims(),
        "start point dims {:?} differ from problem dims {:?}",
        dims.dims(),
        cs.dims().dims()
    );
    Ok(x)
}

/// The marginals of a two-party problem constrained on each party alone.
fn bipartite_targets(cs: &ConstraintSet) -> Result<(DensityMatrix, DensityMatrix)> {
    let find = |i: usize| {
        cs.constraints()
            .iter()
            .find(|c| c.keep().indices() == [i])
            .map(|c| DensityMatrix::single(c.target().clone()))
    };
    match (cs.dims().num_subsystems(), cs.len(), find(0), find(1)) {
        (2, 2, Some(a), Some(b)) => Ok((a?, b?)),
        _ => bail!("greedy and interlace starts need the marginals 1:<file> and 2:<file>"),
    }
}

fn constructed_start(init: &InitArg, cs: &ConstraintSet) -> Result<Option<HermitianMatrix>> {
    Ok(match init {
        InitArg::Random => None,
        InitArg::Greedy => {
            let (a, b) = bipartite_targets(cs)?;
            Some(greedy_minmatch(&a, &b)?.0.into_hermitian())
        }
        InitArg::Interlace => {
            let (a, b) = bipartite_targets(cs)?;
            Some(interlace_decomposition(&a, &b)?.0.into_hermitian())
        }
        InitArg::File(path) => Some(read_start(path, cs)?),
    })
}

fn finish(name: &str, rep: &SolveReport, cs: &ConstraintSet, out: Option<&Path>) -> Result<Status> {
    let summary = RunSummary::new(name, rep, cs)?;
    emit_run(&summary, rep, cs.dims(), out)?;
    Ok(converged(rep))
}

fn solve(command: SolveCommand) -> Result<Status> {
    match command {
        SolveCommand::Spectrum {
            marginals,
            solver,
            spectrum,
        } => {
            let cs = load_problem(&marginals)?;
            let c = read_spectrum(&spectrum)?;
            let rep = solve_with_spectrum(&cs, &c, &solve_options(&solver))?;
            finish("solve spectrum", &rep, &cs, solver.out.as_deref())
        }
        SolveCommand::Rank {
            marginals,
            solver,
            cap,
            init,
        } => {
            let cs = load_problem(&marginals)?;
            let opts = solve_options(&solver);
            let rep = match constructed_start(&init, &cs)? {
                None => solve_with_rank_cap(&cs, cap, &opts)?,
                Some(x0) => solve_with_rank_cap_from(&cs, cap, x0, &opts)?,
            };
            finish("solve rank", &rep, &cs, solver.out.as_deref())
        }
        SolveCommand::Feasible { marginals, solver } => {
            let cs = load_problem(&marginals)?;
            let rep = solve_feasible(&cs, &solve_options(&solver))?;
            finish("solve feasible", &rep, &cs, solver.out.as_deref())
        }
        SolveCommand::MinEntropy {
            marginals,
            solver,
            alpha,
            init,
            stationarity_tol,
            window,
            inner,
        } => {
            let cs = load_problem(&marginals)?;
            let objective = alpha.map_or(Objective::VonNeumann, Objective::Renyi);
            let opts = SolveOptions {
                nspg: NspgOptions {
                    stationarity_tol,
                    window,
                    inner: match inner {
                        InnerArg::Newton => InnerProjection::Newton,
                        InnerArg::Dykstra => InnerProjection::Dykstra,
                    },
                    ..NspgOptions::default()
                },
                ..solve_options(&solver)
            };
            let rep = match constructed_start(&init, &cs)? {
                None => nspg_minimize(&cs, objective, &opts)?,
                Some(x0) => {
                    let d = Diagnostics::of(&x0, &cs)?;
                    ensure!(
                        d.marginal_residual <= START_TOL && d.lambda_min >= -START_TOL,
                        "start point is not a feasible state (residual {:.3e}, λ_min {:.3e})",
                        d.marginal_residual,
                        d.lambda_min
                    );
                    nspg_minimize_from(&cs, objective, x0, &opts)?
                }
            };
            finish("solve min-entropy", &rep, &cs, solver.out.as_deref())
        }
    }
}

fn project(
    input: &Path,
    flags: &MarginalFlags,
    solver: &SolverFlags,
    affine: bool,
    mode: DykstraMode,
) -> Result<Status> {
    let cs = load_problem(flags)?;
    let z = read_start(input, &cs)?;
    if affine {
        let x = AffineProjector::new(&cs)?.apply(&z)?;
        let summary = ConstructSummary {
            command: "project --affine".into(),
            diagnostics: Diagnostics::of(&x, &cs)?,
            weights: None,
        };
        emit_construction(&summary, &x, cs.dims(), solver.out.as_deref())?;
        return Ok(Status::Success);
    }
    let rep = dykstra_project(
        &z,
        &cs,
        &SolveOptions {
            dykstra_mode: mode,
            ..solve_options(solver)
        },
    )?;
    finish("project", &rep, &cs, solver.out.as_deref())
}

#[derive(Serialize)]
struct ConstructSummary {
    command: String,
    #[serde(flatten)]
    diagnostics: Diagnostics,
    /// `tr C_i` of each isospectral pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

type Built = (DensityMatrix, Option<Vec<f64>>);

fn build(command: &ConstructCommand, a: &DensityMatrix, b: &DensityMatrix) -> Result<Built> {
    Ok(match command {
        ConstructCommand::Pure(_) => (pure_state_from_isospectral(a, b)?, None),
        ConstructCommand::RankK { k, .. } => (rank_k_roots_of_unity(a, b, *k)?, None),
        ConstructCommand::Sweep { k, .. } => (rank_sweep(a, b, *k)?, None),
        ConstructCommand::Interlace(_) => {
            let (rho, dec) = interlace_decomposition(a, b)?;
            (rho, Some(dec.weights))
        }
        ConstructCommand::Greedy(_) => {
            let (rho, dec) = greedy_minmatch(a, b)?;
            (rho, Some(dec.weights))
        }
    })
}

fn construct(command: ConstructCommand) -> Result<Status> {
    let (name, flags) = match &command {
        ConstructCommand::Pure(f) => ("construct pure", f),
        ConstructCommand::RankK { flags, .. } => ("construct rank-k", flags),
        ConstructCommand::Sweep { flags, .. } => ("construct sweep", flags),
        ConstructCommand::Interlace(f) => ("construct interlace", f),
        ConstructCommand::Greedy(f) => ("construct greedy", f),
    };
    let (a, b) = bipartite_pair(&flags.marginals)?;
    let cs = ConstraintSet::bipartite(a.matrix(), b.matrix())?;
    let (rho, weights) = build(&command, &a, &b)?;
    let diagnostics = Diagnostics::of(rho.matrix(), &cs)?;
    eprintln!(
        "marginal residual {:.3e}, numerical rank {}",
        diagnostics.marginal_residual, diagnostics.rank
    );
    ensure!(
        diagnostics.marginal_residual <= VERIFY_TOL,
        "construction failed verification (residual {:.3e})",
        diagnostics.marginal_residual
    );
    let summary = ConstructSummary {
        command: name.into(),
        diagnostics,
        weights,
    };
    emit_construction(&summary, rho.matrix(), cs.dims(), flags.out.as_deref())?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct VerifyOutput {
    valid: bool,
    hermitian_defect: f64,
    trace: f64,
    lambda_min: f64,
    marginal_residual: Option<f64>,
    spectrum_gap: Option<f64>,
}

fn verify(
    input: &Path,
    marginals: &[MarginalArg],
    spectrum: Option<&Path>,
    tol: f64,
) -> Result<Status> {
    let (dims, m) = read_matrix(input)?;
    let hermitian_defect = HermitianMatrix::hermitian_defect(&m);
    let x = HermitianMatrix::new(m)?;
    let mut eig = x.eigenvalues()?;
    eig.sort_by(|a, b| b.total_cmp(a));
    let lambda_min = eig.last().copied().unwrap_or(0.0);
    let marginal_residual = if marginals.is_empty() {
        None
    } else {
        let constraints = load(marginals)?
            .into_iter()
            .map(|l| MarginalConstraint::new(l.keep, l.target))
            .collect();
        Some(ConstraintSet::new(dims.clone(), constraints)?.residual(&x)?)
    };
    let spectrum_gap = match spectrum {
        Some(path) => {
            let c = read_spectrum(path)?;
            ensure!(
                c.len() == eig.len(),
                "spectrum length differs from the matrix order"
            );
            Some(
                eig.iter()
                    .zip(c.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            )
        }
        None => None,
    };
    let trace = x.trace();
    let valid = hermitian_defect <= tol
        && lambda_min >= -tol
        && (trace - 1.0).abs() <= tol
        && marginal_residual.is_none_or(|r| r <= tol)
        && spectrum_gap.is_none_or(|g| g <= tol);
    let output = VerifyOutput {
        valid,
        hermitian_defect,
        trace,
        lambda_min,
        marginal_residual,
        spectrum_gap,
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    ensure!(valid, "{} failed verification", input.display());
    Ok(Status::Success)
}

fn random(command: RandomCommand) -> Result<Status> {
    match command {
        RandomCommand::Unitary { n, seed, out } => {
            ensure!(n > 0, "order must be positive");
            let u = random_unitary(n, seed);
            emit_text(&matrix_json(&SystemDims::single(n)?, &u)?, out.as_deref())?;
        }
        RandomCommand::Density { dims, seed, out } => {
            let dims = SystemDims::new(dims.0)?;
            let rho = random_density(&dims, seed);
            emit_text(&matrix_json(&dims, rho.as_matrix())?, out.as_deref())?;
        }
        RandomCommand::Probvec { n, seed, out } => {
            ensure!(n > 0, "length must be positive");
            let values = random_probability_vector(n, seed).into_vec();
            let file = ValuesFile { values };
            match out {
                Some(path) => write_json(&path, &file)?,
                None => println!("{}", serde_json::to_string(&file)?),
            }
        }
    }
    Ok(Status::Success)
}
