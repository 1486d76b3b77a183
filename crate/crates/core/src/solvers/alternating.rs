use std::time::Instant;

use super::{best_of_restarts, check_start, random_start, SolveOptions, SolveReport};
use crate::projections::{project_psd, project_spectrum, AffineProjector, ConstraintSet, Spectrum};
use crate::tensorcore::{numerical_rank, HermitianMatrix};
use crate::{Error, Result};

/// Alternates the marginal projection with `second`, declaring a solution
/// once the iterate after `second` has marginal residual below `δ`.
/// A start point that already meets the residual and is fixed by `second`
/// is returned at iteration 0.
fn alternate<F>(
    cs: &ConstraintSet,
    x0: HermitianMatrix,
    opts: &SolveOptions,
    seed: u64,
    second: F,
) -> Result<SolveReport>
where
    F: Fn(&HermitianMatrix) -> Result<HermitianMatrix>,
{
    opts.validate()?;
    check_start(&x0, cs.dims())?;
    let started = Instant::now();
    let affine = AffineProjector::new(cs)?;
    let report = |solution, history: Vec<f64>, converged| SolveReport {
        solution,
        iterations: history.len(),
        residual_history: history,
        objective_history: Vec::new(),
        converged,
        wall_time: started.elapsed(),
        seed,
    };
    if cs.residual(&x0)? < opts.tolerance && second(&x0)?.distance(&x0) < opts.tolerance {
        return Ok(report(x0, Vec::new(), true));
    }
    let mut x = x0;
    let mut history = Vec::new();
    for _ in 0..opts.max_iterations {
        x = second(&affine.apply(&x)?)?;
        let err = cs.residual(&x)?;
        history.push(err);
        if err < opts.tolerance {
            return Ok(report(x, history, true));
        }
    }
    Ok(report(x, history, false))
}

fn check_spectrum(cs: &ConstraintSet, c: &Spectrum) -> Result<()> {
    c.check_probability()?;
    if c.len() != cs.dims().total() {
        return Err(Error::DimensionMismatch {
            context: "spectrum length vs total dimension",
            expected: cs.dims().total(),
            found: c.len(),
        });
    }
    Ok(())
}

/// Alternating projections between the marginal set and the matrices with
/// eigenvalues `c`, from `U diag(p) U*` with Haar `U` and random `p`.
pub fn solve_with_spectrum(
    cs: &ConstraintSet,
    c: &Spectrum,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_spectrum(cs, c)?;
    best_of_restarts(opts, |seed| {
        solve_with_spectrum_from(
            cs,
            c,
            random_start(cs.dims(), seed),
            &SolveOptions {
                seed,
                ..opts.clone()
            },
        )
    })
}

/// [`solve_with_spectrum`] from an explicit start point.
pub fn solve_with_spectrum_from(
    cs: &ConstraintSet,
    c: &Spectrum,
    x0: HermitianMatrix,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_spectrum(cs, c)?;
    alternate(cs, x0, opts, opts.seed, |x| project_spectrum(x, c))
}

/// Keeps the `r` largest eigenvalues, clipped at zero, and zeroes the rest.
fn truncate_rank(x: &HermitianMatrix, r: usize) -> Result<HermitianMatrix> {
    let e = x.eig()?;
    let values: Vec<f64> = e
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| if i < r { v.max(0.0) } else { 0.0 })
        .collect();
    Ok(e.reconstruct_with(&values))
}

fn check_cap(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidParameter(
            "rank cap must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Alternating projections between the marginal set and PSD matrices of rank
/// at most `r`; the truncation is not renormalized.
pub fn solve_with_rank_cap(
    cs: &ConstraintSet,
    r: usize,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_cap(r)?;
    best_of_restarts(opts, |seed| {
        solve_with_rank_cap_from(
            cs,
            r,
            random_start(cs.dims(), seed),
            &SolveOptions {
                seed,
                ..opts.clone()
            },
        )
    })
}

/// [`solve_with_rank_cap`] from an explicit start point.
pub fn solve_with_rank_cap_from(
    cs: &ConstraintSet,
    r: usize,
    x0: HermitianMatrix,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_cap(r)?;
    let report = alternate(cs, x0, opts, opts.seed, |x| truncate_rank(x, r))?;
    debug_assert!(!report.converged || numerical_rank(&report.solution.eigenvalues()?) <= r);
    Ok(report)
}

/// Alternating projections between the marginal set and the PSD cone.
pub fn solve_feasible(cs: &ConstraintSet, opts: &SolveOptions) -> Result<SolveReport> {
    best_of_restarts(opts, |seed| {
        solve_feasible_from(
            cs,
            random_start(cs.dims(), seed),
            &SolveOptions {
                seed,
                ..opts.clone()
            },
        )
    })
}

/// [`solve_feasible`] from an explicit start point.
pub fn solve_feasible_from(
    cs: &ConstraintSet,
    x0: HermitianMatrix,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    alternate(cs, x0, opts, opts.seed, project_psd)
}
