use std::time::Instant;

use nalgebra::DMatrix;

use super::{check_start, SolveOptions, SolveReport};
use crate::projections::ConstraintSet;
use crate::tensorcore::{hermitian_eig, CMatrix, EigDecomposition, HermitianMatrix, RANK_TOL};
use crate::{Complex64, Result};

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-10;
const REGULARIZATION_CAP: f64 = 1e-2;
const MAX_STRETCH: f64 = 1e12;
const ROUNDOFF_FACTOR: f64 = 100.0;
const CONTINUATION_FACTOR: f64 = 10.0;

pub(crate) type Dual = Vec<CMatrix>;

fn dual_inner(a: &Dual, b: &Dual) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dotc(y).re).sum()
}

fn axpy(y: &mut Dual, alpha: f64, x: &Dual) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += v * Complex64::from(alpha);
    }
}

fn shifted(y: &Dual, t: f64, d: &Dual) -> Dual {
    let mut out = y.clone();
    axpy(&mut out, t, d);
    out
}

/// Orthonormal basis of the subspace that carries every PSD matrix with the
/// prescribed marginals, or `None` when that is the whole space.
///
/// A kernel vector `v` of a target `ρ_J` forces `X (v ⊗ w) = 0` for every
/// feasible `X` and every `w` on the traced factors.
pub(crate) fn support_basis(cs: &ConstraintSet) -> Result<Option<CMatrix>> {
    let n = cs.dims().total();
    let mut kernel = CMatrix::zeros(n, n);
    let mut any = false;
    for (split, c) in cs.splits().iter().zip(cs.constraints()) {
        let e = c.target().eig()?;
        let cutoff = RANK_TOL * e.values[0].max(1.0);
        for (j, &v) in e.values.iter().enumerate() {
            if v <= cutoff {
                let col = e.vectors.column(j);
                split.add_lifted(&mut kernel, &(col * col.adjoint()), 1.0);
                any = true;
            }
        }
    }
    if !any {
        return Ok(None);
    }
    let e = HermitianMatrix::symmetrized(kernel).eig()?;
    let keep: Vec<usize> = (0..n).filter(|&j| e.values[j] < 0.5).collect();
    Ok(Some(CMatrix::from_fn(n, keep.len(), |i, j| {
        e.vectors[(i, keep[j])]
    })))
}

struct Dualized<'a> {
    cs: &'a ConstraintSet,
    basis: Option<&'a CMatrix>,
    /// `z` compressed to the support.
    z: CMatrix,
}

struct Point {
    eig: EigDecomposition,
    x: HermitianMatrix,
    theta: f64,
    grad: Dual,
}

impl<'a> Dualized<'a> {
    fn new(cs: &'a ConstraintSet, basis: Option<&'a CMatrix>, z: &CMatrix) -> Self {
        let mut out = Self {
            cs,
            basis,
            z: CMatrix::zeros(0, 0),
        };
        out.z = out.compress(z.clone());
        out
    }

    fn compress(&self, m: CMatrix) -> CMatrix {
        match self.basis {
            Some(v) => v.adjoint() * m * v,
            None => m,
        }
    }

    fn expand(&self, m: CMatrix) -> CMatrix {
        match self.basis {
            Some(v) => v * m * v.adjoint(),
            None => m,
        }
    }

    fn adjoint(&self, y: &Dual) -> CMatrix {
        let n = self.cs.dims().total();
        let mut out = CMatrix::zeros(n, n);
        for (s, d) in self.cs.splits().iter().zip(y) {
            s.add_lifted(&mut out, d, 1.0);
        }
        self.compress(out)
    }

    fn forward(&self, x: &CMatrix) -> Dual {
        self.cs.splits().iter().map(|s| s.trace_out(x)).collect()
    }

    fn evaluate(&self, y: &Dual) -> Result<Point> {
        let w = HermitianMatrix::symmetrized(&self.z + self.adjoint(y));
        let eig = hermitian_eig(&w)?;
        let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
        let x =
            HermitianMatrix::symmetrized(self.expand(eig.reconstruct_with(&clipped).into_matrix()));
        let mut grad = self.forward(x.as_matrix());
        for (g, c) in grad.iter_mut().zip(self.cs.constraints()) {
            *g -= c.target().as_matrix();
        }
        let targets: Dual = self
            .cs
            .constraints()
            .iter()
            .map(|c| c.target().as_matrix().clone())
            .collect();
        let theta = 0.5 * clipped.iter().map(|v| v * v).sum::<f64>() - dual_inner(&targets, y);
        Ok(Point {
            eig,
            x,
            theta,
            grad,
        })
    }

    /// Generalized Jacobian of the dual gradient at `p`, applied to `h`.
    fn jacobian(&self, p: &Point, omega: &DMatrix<f64>, h: &Dual, shift: f64) -> Dual {
        let u = &p.eig.vectors;
        let mut inner = u.adjoint() * self.adjoint(h) * u;
        inner.zip_apply(omega, |a, w| *a *= w);
        let mut out = self.forward(&self.expand(u * inner * u.adjoint()));
        axpy(&mut out, shift, h);
        out
    }
}

fn divided_differences(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(values.len(), values.len(), |i, j| {
        let (a, b) = (values[i], values[j]);
        match (a > 0.0, b > 0.0) {
            (true, true) => 1.0,
            (false, false) => 0.0,
            _ => (a.max(0.0) - b.max(0.0)) / (a - b),
        }
    })
}

/// Conjugate gradients on the shifted Jacobian system `(V + shift) d = rhs`.
fn conjugate_gradient(
    f: &Dualized<'_>,
    p: &Point,
    omega: &DMatrix<f64>,
    rhs: &Dual,
    shift: f64,
    tol: f64,
    max_steps: usize,
) -> Dual {
    let mut d: Dual = rhs.iter().map(|m| m * Complex64::from(0.0)).collect();
    let mut r = rhs.clone();
    let mut dir = r.clone();
    let mut rr = dual_inner(&r, &r);
    for _ in 0..max_steps {
        if rr.sqrt() <= tol {
            break;
        }
        let q = f.jacobian(p, omega, &dir, shift);
        let curvature = dual_inner(&dir, &q);
        if curvature <= 0.0 {
            break;
        }
        let step = rr / curvature;
        axpy(&mut d, step, &dir);
        axpy(&mut r, -step, &q);
        let next = dual_inner(&r, &r);
        for (u, v) in dir.iter_mut().zip(&r) {
            *u = v + &*u * Complex64::from(next / rr);
        }
        rr = next;
    }
    d
}

pub(crate) struct DualSolve {
    pub point: HermitianMatrix,
    pub dual: Dual,
    pub history: Vec<f64>,
    pub converged: bool,
}

fn zero_dual(cs: &ConstraintSet) -> Dual {
    cs.constraints()
        .iter()
        .map(|c| CMatrix::zeros(c.target().order(), c.target().order()))
        .collect()
}

/// Newton iteration on the dual from `y`, until the primal residual is below
/// `tol` or `max_iterations` steps have been taken.
fn solve_dual(f: &Dualized<'_>, mut y: Dual, tol: f64, max_iterations: usize) -> Result<DualSolve> {
    let cs = f.cs;
    let dual_dim: usize = y.iter().map(|m| m.len()).sum();
    let mut p = f.evaluate(&y)?;
    let mut err = cs.residual(&p.x)?;
    let mut history = vec![err];
    let mut converged = err < tol;
    while !converged && history.len() < max_iterations {
        let gnorm = dual_inner(&p.grad, &p.grad).sqrt();
        let omega = divided_differences(&p.eig.values);
        let rhs: Dual = p.grad.iter().map(|g| -g).collect();
        let shift = gnorm.min(REGULARIZATION_CAP);
        let d = conjugate_gradient(
            f,
            &p,
            &omega,
            &rhs,
            shift,
            0.1_f64.min(gnorm) * gnorm,
            2 * dual_dim,
        );
        let d = if dual_inner(&p.grad, &d) < 0.0 {
            d
        } else {
            rhs
        };
        let slope = dual_inner(&p.grad, &d);
        // Also accept any step that lowers the primal residual.
        let accept = |q: &Point, t: f64| -> Result<bool> {
            Ok(q.theta <= p.theta + ARMIJO * t * slope || cs.residual(&q.x)? < err)
        };
        let mut t = 1.0;
        let mut next = loop {
            let q = f.evaluate(&shifted(&y, t, &d))?;
            if accept(&q, t)? || t < MIN_STEP {
                break q;
            }
            t *= 0.5;
        };
        if t < MIN_STEP {
            break;
        }
        // Stretch a full step while the dual keeps decreasing.
        if t == 1.0 {
            while t < MAX_STRETCH {
                let q = f.evaluate(&shifted(&y, 2.0 * t, &d))?;
                if q.theta >= next.theta || q.theta > p.theta + ARMIJO * 2.0 * t * slope {
                    break;
                }
                t *= 2.0;
                next = q;
            }
        }
        y = shifted(&y, t, &d);
        p = next;
        err = cs.residual(&p.x)?;
        history.push(err);
        converged = err < tol;
    }
    Ok(DualSolve {
        point: p.x,
        dual: y,
        history,
        converged,
    })
}

/// Round-off floor of the residual for a matrix of norm `scale`.
pub(crate) fn attainable(tol: f64, scale: f64) -> f64 {
    tol.max(ROUNDOFF_FACTOR * f64::EPSILON * scale)
}

/// `Π(base + α·dir)` onto the PSD matrices with the prescribed marginals.
///
/// Large `α` is reached through the scales `1, 10, 100, …`, each solve warm
/// started from a linear extrapolation of the previous two dual solutions.
/// The residual tolerance is relaxed to the round-off floor of each scale.
pub(crate) fn project_along(
    cs: &ConstraintSet,
    basis: Option<&CMatrix>,
    base: &HermitianMatrix,
    dir: &HermitianMatrix,
    alpha: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<DualSolve> {
    let mut scales = Vec::new();
    let mut s = 1.0_f64.min(alpha);
    while s < alpha {
        scales.push(s);
        s *= CONTINUATION_FACTOR;
    }
    scales.push(alpha);
    let mut previous: Option<(f64, Dual)> = None;
    let mut y = zero_dual(cs);
    let mut total = Vec::new();
    let mut last = None;
    for (i, &scale) in scales.iter().enumerate() {
        let z = base + &(dir * scale);
        let f = Dualized::new(cs, basis, z.as_matrix());
        let out = solve_dual(
            &f,
            y.clone(),
            attainable(tol, z.frobenius_norm()),
            max_iterations,
        )?;
        total.extend_from_slice(&out.history);
        if let Some(&next_scale) = scales.get(i + 1) {
            y = match &previous {
                Some((s0, y0)) => {
                    let ratio = (next_scale - scale) / (scale - s0);
                    let mut guess = out.dual.clone();
                    for (g, (a, b)) in guess.iter_mut().zip(out.dual.iter().zip(y0)) {
                        *g += (a - b) * Complex64::from(ratio);
                    }
                    guess
                }
                None => out
                    .dual
                    .iter()
                    .map(|m| m * Complex64::from(next_scale / scale))
                    .collect(),
            };
        }
        previous = Some((scale, out.dual.clone()));
        last = Some(out);
    }
    let mut out = last.expect("at least one scale");
    out.history = total;
    Ok(out)
}

/// Frobenius projection of `z` onto the PSD matrices with the prescribed
/// marginals, by semismooth Newton iteration on the dual problem
/// `min_y ½‖Π₊(z + A*y)‖² − ⟨b, y⟩` where `A` collects the partial traces.
///
/// Every iterate `Π₊(z + A*y)` is PSD; `residual_history` logs its marginal
/// residual and the run stops once that falls below `opts.tolerance`, or
/// below the round-off floor of `z` if that is larger. Inputs of norm above
/// one are reached by continuation from the unit-norm rescaling. Kernels of
/// the targets are factored out first, so rank-deficient marginals do not
/// degrade the dual.
pub fn newton_project(
    z: &HermitianMatrix,
    cs: &ConstraintSet,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    check_start(z, cs.dims())?;
    let started = Instant::now();
    let basis = support_basis(cs)?;
    let norm = z.frobenius_norm();
    let zero = HermitianMatrix::zeros(z.order());
    let out = if norm > 1.0 {
        project_along(
            cs,
            basis.as_ref(),
            &zero,
            &(z * (1.0 / norm)),
            norm,
            opts.tolerance,
            opts.max_iterations,
        )?
    } else {
        project_along(
            cs,
            basis.as_ref(),
            z,
            &zero,
            0.0,
            opts.tolerance,
            opts.max_iterations,
        )?
    };
    Ok(SolveReport {
        solution: out.point,
        iterations: out.history.len(),
        residual_history: out.history,
        objective_history: Vec::new(),
        converged: out.converged,
        wall_time: started.elapsed(),
        seed: opts.seed,
    })
}
