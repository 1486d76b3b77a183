use std::time::Instant;

use super::{check_start, DykstraMode, SolveOptions, SolveReport};
use crate::projections::{project_psd, AffineProjector, ConstraintSet};
use crate::tensorcore::HermitianMatrix;
use crate::Result;

pub(crate) struct Sweeps {
    pub point: HermitianMatrix,
    pub sweeps: usize,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Projects `z` onto the PSD matrices of the affine marginal set.
///
/// Stops once a sweep moves the PSD iterate by less than `tol` and, when
/// `residual_tol` is given, its marginal residual is below that value.
pub(crate) fn sweep(
    z: &HermitianMatrix,
    cs: &ConstraintSet,
    affine: &AffineProjector,
    mode: DykstraMode,
    tol: f64,
    residual_tol: Option<f64>,
    max_sweeps: usize,
) -> Result<Sweeps> {
    let mut x = z.clone();
    let mut increment = HermitianMatrix::zeros(z.order());
    let mut history = Vec::new();
    for k in 1..=max_sweeps {
        let y = affine.apply(&x)?;
        let next = match mode {
            DykstraMode::WithIncrements => {
                let shifted = &y + &increment;
                let next = project_psd(&shifted)?;
                increment = &shifted - &next;
                next
            }
            DykstraMode::Plain => project_psd(&y)?,
        };
        let change = match mode {
            DykstraMode::WithIncrements => next.distance(&x),
            DykstraMode::Plain => next.distance(&y),
        };
        let err = cs.residual(&next)?;
        history.push(err);
        x = next;
        if change < tol && residual_tol.is_none_or(|r| err < r) {
            return Ok(Sweeps {
                point: x,
                sweeps: k,
                history,
                converged: true,
            });
        }
    }
    Ok(Sweeps {
        point: x,
        sweeps: max_sweeps,
        history,
        converged: false,
    })
}

/// Frobenius projection of `z` onto the states with the prescribed marginals.
///
/// `WithIncrements` runs Dykstra's scheme with the correction carried on the
/// PSD leg. `Plain` alternates the two projections and stops when they agree.
/// Each sweep logs the marginal residual of its PSD iterate.
pub fn dykstra_project(
    z: &HermitianMatrix,
    cs: &ConstraintSet,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    check_start(z, cs.dims())?;
    let started = Instant::now();
    let affine = AffineProjector::new(cs)?;
    let out = sweep(
        z,
        cs,
        &affine,
        opts.dykstra_mode,
        opts.tolerance,
        Some(opts.tolerance),
        opts.max_iterations,
    )?;
    Ok(SolveReport {
        solution: out.point,
        iterations: out.sweeps,
        residual_history: out.history,
        objective_history: Vec::new(),
        converged: out.converged,
        wall_time: started.elapsed(),
        seed: opts.seed,
    })
}
