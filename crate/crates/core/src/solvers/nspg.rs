use std::collections::VecDeque;
use std::time::Instant;

use super::dykstra::sweep;
use super::newton::{attainable, project_along, support_basis};
use super::{
    best_of_restarts, check_start, random_start, DykstraMode, InnerProjection, Objective,
    SolveOptions, SolveReport,
};
use crate::projections::{AffineProjector, ConstraintSet};
use crate::tensorcore::{CMatrix, HermitianMatrix};
use crate::{Error, Result};

/// Backtracking gives up once the step fraction drops below this.
pub const MIN_STEP_FRACTION: f64 = 1e-16;

const NEGATIVE_SLACK: f64 = 1e-14;

struct Projector<'a> {
    cs: &'a ConstraintSet,
    affine: AffineProjector,
    method: InnerProjection,
    basis: Option<CMatrix>,
    tol: f64,
    residual_tol: f64,
    max_iterations: usize,
}

impl Projector<'_> {
    /// Projection of `base + alpha·dir`.
    fn along(
        &self,
        base: &HermitianMatrix,
        dir: &HermitianMatrix,
        alpha: f64,
    ) -> Result<HermitianMatrix> {
        let (point, converged, steps, residual) = match self.method {
            InnerProjection::Newton => {
                let out = project_along(
                    self.cs,
                    self.basis.as_ref(),
                    base,
                    dir,
                    alpha,
                    self.residual_tol,
                    self.max_iterations,
                )?;
                let residual = out.history.last().copied().unwrap_or(f64::NAN);
                (out.point, out.converged, out.history.len(), residual)
            }
            InnerProjection::Dykstra => {
                let z = base + &(dir * alpha);
                let tol = attainable(self.tol, z.frobenius_norm());
                let out = sweep(
                    &z,
                    self.cs,
                    &self.affine,
                    DykstraMode::WithIncrements,
                    tol,
                    None,
                    self.max_iterations,
                )?;
                let residual = out.history.last().copied().unwrap_or(f64::NAN);
                (out.point, out.converged, out.sweeps, residual)
            }
        };
        if !converged {
            return Err(Error::InnerProjectionFailed {
                sweeps: steps,
                residual,
            });
        }
        Ok(point)
    }

    fn apply(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.along(z, &HermitianMatrix::zeros(z.order()), 0.0)
    }

    /// Restores feasibility of a point that is already close: the affine
    /// projection pins the marginals exactly, and the full projection runs
    /// first only if that leaves a clearly negative eigenvalue.
    fn restore(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        let pinned = self.affine.apply(z)?;
        let lowest = pinned.eigenvalues()?.last().copied().unwrap_or(0.0);
        if lowest >= -NEGATIVE_SLACK {
            return Ok(pinned);
        }
        self.affine.apply(&self.apply(z)?)
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
const QUADRATURE: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Relative size below which the change in objective is integrated.
const DIRECT_DIFFERENCE_FLOOR: f64 = 1e-10;

/// `f(next) − f(rho)`, integrated along the segment when small.
fn objective_change(
    objective: Objective,
    rho: &HermitianMatrix,
    f: f64,
    next: &HermitianMatrix,
) -> Result<f64> {
    let direct = objective.value(next)? - f;
    if direct.abs() > DIRECT_DIFFERENCE_FLOOR * f.abs().max(1.0) {
        return Ok(direct);
    }
    let step = next - rho;
    let mut change = 0.0;
    for (node, weight) in QUADRATURE {
        let point = rho + &(&step * node);
        change += weight * objective.gradient(&point)?.inner(&step);
    }
    Ok(change)
}

/// Nonmonotone spectral projected gradient minimization of `objective` over
/// the states with the prescribed marginals, started from the projection of a
/// random density matrix. Restarts run concurrently; see [`SolveOptions`].
pub fn nspg_minimize(
    cs: &ConstraintSet,
    objective: Objective,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    objective.validate()?;
    opts.validate()?;
    best_of_restarts(opts, |seed| {
        let inner = projector(cs, opts)?;
        let start = inner.restore(&inner.apply(&random_start(cs.dims(), seed))?)?;
        nspg_minimize_from(
            cs,
            objective,
            start,
            &SolveOptions {
                seed,
                ..opts.clone()
            },
        )
    })
}

fn projector<'a>(cs: &'a ConstraintSet, opts: &SolveOptions) -> Result<Projector<'a>> {
    Ok(Projector {
        cs,
        affine: AffineProjector::new(cs)?,
        method: opts.nspg.inner,
        basis: support_basis(cs)?,
        tol: opts.nspg.inner_tolerance,
        residual_tol: opts.nspg.inner_residual_tolerance,
        max_iterations: opts.nspg.inner_max_iterations,
    })
}

/// [`nspg_minimize`] from a start point that is already feasible.
///
/// `residual_history` holds the stationarity gap
/// `‖Π(ρ_t − ∇f(ρ_t)) − ρ_t‖_F` of every visited iterate, and
/// `objective_history` holds `f(ρ_t)` for the same iterates.
pub fn nspg_minimize_from(
    cs: &ConstraintSet,
    objective: Objective,
    rho0: HermitianMatrix,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    objective.validate()?;
    opts.validate()?;
    check_start(&rho0, cs.dims())?;
    let started = Instant::now();
    let p = &opts.nspg;
    let proj = projector(cs, opts)?;
    let shrink = 0.5 * (p.sigma1 + p.sigma2);

    let mut rho = rho0;
    let mut f = objective.value(&rho)?;
    let mut grad = objective.gradient(&rho)?;
    let mut alpha = 1.0_f64.clamp(p.alpha_min, p.alpha_max);
    let mut window: VecDeque<f64> = VecDeque::from([f]);
    let mut gaps = Vec::new();
    let mut values = vec![f];
    let mut converged = false;

    for t in 0..opts.max_iterations {
        let descent = -&grad;
        let unit_target = proj.along(&rho, &descent, 1.0)?;
        let gap = unit_target.distance(&rho);
        gaps.push(gap);
        if gap <= p.stationarity_tol {
            converged = true;
            break;
        }
        if t + 1 == opts.max_iterations {
            break;
        }
        let target = if alpha == 1.0 {
            unit_target
        } else {
            proj.along(&rho, &descent, alpha)?
        };
        let d = &proj.affine.apply(&target)? - &rho;
        let slope = d.inner(&grad).min(0.0);
        let reference = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut lambda = 1.0;
        let (next, f_next) = loop {
            let candidate = proj.restore(&(&rho + &(&d * lambda)))?;
            let change = objective_change(objective, &rho, f, &candidate)?;
            if change <= (reference - f) + p.gamma * lambda * slope {
                break (candidate, f + change);
            }
            lambda *= shrink;
            if lambda < MIN_STEP_FRACTION {
                return Err(Error::LineSearchCollapse {
                    iteration: t,
                    step: lambda,
                });
            }
        };
        let grad_next = objective.gradient(&next)?;
        let s = &next - &rho;
        let y = &grad_next - &grad;
        let b = s.inner(&y);
        alpha = if b <= 0.0 {
            p.alpha_max
        } else {
            (s.inner(&s) / b).clamp(p.alpha_min, p.alpha_max)
        };
        rho = next;
        f = f_next;
        grad = grad_next;
        values.push(f);
        window.push_back(f);
        if window.len() > p.window {
            window.pop_front();
        }
    }

    Ok(SolveReport {
        solution: rho,
        iterations: gaps.len(),
        residual_history: gaps,
        objective_history: values,
        converged,
        wall_time: started.elapsed(),
        seed: opts.seed,
    })
}

/// Largest objective over the trailing window ending at each iterate.
pub fn window_maxima(values: &[f64], window: usize) -> Vec<f64> {
    (0..values.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(window.max(1));
            values[lo..=t]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}
