//! Machine-readable run summaries and reports.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use qmarg_core::entropy::von_neumann_of_spectrum;
use qmarg_core::tensorcore::numerical_rank;
use qmarg_core::{ConstraintSet, HermitianMatrix, SolveReport, SystemDims};
use serde::Serialize;

use crate::io::{write_json, MatrixFile};

/// Diagnostics of a candidate solution.
#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub rank: usize,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub entropy: f64,
    pub trace: f64,
    /// `Σ ‖tr_{J^c} X − ρ_J‖_F`.
    pub marginal_residual: f64,
}

impl Diagnostics {
    pub fn of(x: &HermitianMatrix, cs: &ConstraintSet) -> Result<Self> {
        let eig = x.eigenvalues()?;
        Ok(Self {
            rank: numerical_rank(&eig),
            lambda_max: eig.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            lambda_min: eig.iter().copied().fold(f64::INFINITY, f64::min),
            entropy: von_neumann_of_spectrum(&eig),
            trace: x.trace(),
            marginal_residual: cs.residual(x)?,
        })
    }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub wall_time_secs: f64,
    pub seed: u64,
    #[serde(flatten)]
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Serialize)]
struct FullReport<'a> {
    #[serde(flatten)]
    summary: &'a RunSummary,
    residual_history: &'a [f64],
    objective_history: &'a [f64],
}

impl RunSummary {
    pub fn new(command: &str, rep: &SolveReport, cs: &ConstraintSet) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            converged: rep.converged,
            iterations: rep.iterations,
            final_residual: rep.final_residual(),
            wall_time_secs: rep.wall_time.as_secs_f64(),
            seed: rep.seed,
            diagnostics: Diagnostics::of(&rep.solution, cs)?,
        })
    }
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// Prints the summary and, with an output directory, writes the solution and
/// the full report there.
pub fn emit_run(
    summary: &RunSummary,
    rep: &SolveReport,
    dims: &SystemDims,
    out: Option<&Path>,
) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(summary)?);
    if let Some(dir) = out {
        prepare(dir)?;
        write_json(
            &dir.join("solution.json"),
            &MatrixFile::from_matrix(dims, rep.solution.as_matrix()),
        )?;
        write_json(
            &dir.join("report.json"),
            &FullReport {
                summary,
                residual_history: &rep.residual_history,
                objective_history: &rep.objective_history,
            },
        )?;
    }
    Ok(())
}

/// Same as [`emit_run`] for direct constructions.
pub fn emit_construction<T: Serialize>(
    summary: &T,
    solution: &HermitianMatrix,
    dims: &SystemDims,
    out: Option<&Path>,
) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(summary)?);
    if let Some(dir) = out {
        prepare(dir)?;
        write_json(
            &dir.join("solution.json"),
            &MatrixFile::from_matrix(dims, solution.as_matrix()),
        )?;
        write_json(&dir.join("report.json"), summary)?;
    }
    Ok(())
}
