//! Iterative schemes on the marginal affine set: alternating projections with
//! a prescribed spectrum, a rank cap or the PSD cone, Dykstra projection onto
//! the feasible states, and nonmonotone spectral projected gradient entropy
//! minimization.

mod alternating;
mod dykstra;
mod newton;
mod nspg;

pub use alternating::{
    solve_feasible, solve_feasible_from, solve_with_rank_cap, solve_with_rank_cap_from,
    solve_with_spectrum, solve_with_spectrum_from,
};
pub use dykstra::dykstra_project;
pub use newton::newton_project;
pub use nspg::{nspg_minimize, nspg_minimize_from, window_maxima, MIN_STEP_FRACTION};

use std::time::Duration;

use crate::entropy;
use crate::tensorcore::{random_density, HermitianMatrix, SystemDims};
use crate::{Error, Result};

/// How [`dykstra_project`] treats the PSD leg.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DykstraMode {
    /// Carry the correction increment on the PSD leg; converges to the
    /// projection of the start point.
    #[default]
    WithIncrements,
    /// Plain alternation of the two projections, stopping once the two legs
    /// agree within the tolerance.
    Plain,
}

/// Algorithm used for the projections inside [`nspg_minimize`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InnerProjection {
    /// Semismooth Newton on the dual, continued in the step scale; see
    /// [`newton_project`].
    #[default]
    Newton,
    /// Dykstra sweeps with increments; see [`dykstra_project`].
    Dykstra,
}

/// Parameters of the nonmonotone spectral projected gradient method.
#[derive(Clone, Debug, PartialEq)]
pub struct NspgOptions {
    /// Nonmonotone window `M`.
    pub window: usize,
    /// Sufficient decrease `γ`.
    pub gamma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub stationarity_tol: f64,
    pub inner: InnerProjection,
    /// Dykstra sweep-change tolerance.
    pub inner_tolerance: f64,
    /// Newton marginal-residual tolerance.
    pub inner_residual_tolerance: f64,
    /// Newton steps or Dykstra sweeps per inner projection.
    pub inner_max_iterations: usize,
}

impl Default for NspgOptions {
    fn default() -> Self {
        Self {
            window: 10,
            gamma: 1e-4,
            sigma1: 0.1,
            sigma2: 0.9,
            alpha_min: 1e-10,
            alpha_max: 1e10,
            stationarity_tol: 1e-8,
            inner: InnerProjection::default(),
            inner_tolerance: 1e-12,
            inner_residual_tolerance: 1e-10,
            inner_max_iterations: 5000,
        }
    }
}

/// Iteration limit, tolerance and seeding shared by all solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Residual tolerance `δ`.
    pub tolerance: f64,
    pub seed: u64,
    /// Independent runs with seeds `seed, seed + 1, …`.
    pub restarts: usize,
    pub dykstra_mode: DykstraMode,
    pub nspg: NspgOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            tolerance: 1e-12,
            seed: 0,
            restarts: 1,
            dykstra_mode: DykstraMode::default(),
            nspg: NspgOptions::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        let n = &self.nspg;
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad("tolerance must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if n.window == 0 {
            return bad("nonmonotone window must be at least 1");
        }
        if !(0.0 < n.sigma1 && n.sigma1 < n.sigma2 && n.sigma2 < 1.0) {
            return bad("safeguards need 0 < sigma1 < sigma2 < 1");
        }
        if !(0.0 < n.alpha_min && n.alpha_min < n.alpha_max) {
            return bad("step bounds need 0 < alpha_min < alpha_max");
        }
        if !(0.0 < n.gamma && n.gamma < 1.0) {
            return bad("sufficient decrease gamma must lie in (0, 1)");
        }
        if !(n.stationarity_tol > 0.0
            && n.inner_tolerance > 0.0
            && n.inner_residual_tolerance > 0.0)
            || n.inner_max_iterations == 0
        {
            return bad("inner projection settings must be positive");
        }
        Ok(())
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: HermitianMatrix,
    pub iterations: usize,
    /// Per-iteration convergence measure: the marginal residual `Err` for the
    /// projection schemes, the stationarity gap for NSPG.
    pub residual_history: Vec<f64>,
    /// NSPG objective values, starting with the initial point; empty otherwise.
    pub objective_history: Vec<f64>,
    pub converged: bool,
    pub wall_time: Duration,
    /// Seed of the run that produced this report.
    pub seed: u64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .copied()
            .unwrap_or(f64::INFINITY)
    }
}

/// Entropy functional driving [`nspg_minimize`].
///
/// The minimized function is the negated entropy, `tr(ρ ln ρ) = −S(ρ)` or
/// `−S_α(ρ)`, so the solver climbs towards high-entropy states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    VonNeumann,
    Renyi(f64),
}

impl Objective {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Objective::VonNeumann => Ok(()),
            Objective::Renyi(a) if a > 0.0 && a.is_finite() && a != 1.0 => Ok(()),
            Objective::Renyi(a) => Err(Error::InvalidParameter(format!(
                "Rényi order {a} must be positive and not 1"
            ))),
        }
    }

    /// The entropy itself, `S` or `S_α`.
    pub fn entropy(&self, rho: &HermitianMatrix) -> Result<f64> {
        match *self {
            Objective::VonNeumann => entropy::von_neumann(rho),
            Objective::Renyi(a) => entropy::renyi(rho, a),
        }
    }

    /// The minimized value, `−entropy`.
    pub fn value(&self, rho: &HermitianMatrix) -> Result<f64> {
        Ok(-self.entropy(rho)?)
    }

    pub fn gradient(&self, rho: &HermitianMatrix) -> Result<HermitianMatrix> {
        match *self {
            Objective::VonNeumann => entropy::grad_von_neumann_objective(rho),
            Objective::Renyi(a) => Ok(-&entropy::grad_renyi(rho, a)?),
        }
    }
}

/// Runs `run` once per restart seed, concurrently, and keeps the first
/// converged report in seed order, or else the one with the smallest final
/// residual.
pub(crate) fn best_of_restarts<F>(opts: &SolveOptions, run: F) -> Result<SolveReport>
where
    F: Fn(u64) -> Result<SolveReport> + Sync,
{
    let seeds: Vec<u64> = (0..opts.restarts as u64)
        .map(|i| opts.seed.wrapping_add(i))
        .collect();
    let results: Vec<Result<SolveReport>> = if seeds.len() == 1 {
        vec![run(seeds[0])]
    } else {
        let run = &run;
        std::thread::scope(|scope| {
            let handles: Vec<_> = seeds.iter().map(|&s| scope.spawn(move || run(s))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        })
    };
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;
    if let Some(pos) = reports.iter().position(|r| r.converged) {
        return Ok(reports.into_iter().nth(pos).expect("position is in range"));
    }
    Ok(reports
        .into_iter()
        .min_by(|a, b| a.final_residual().total_cmp(&b.final_residual()))
        .expect("at least one restart"))
}

pub(crate) fn random_start(dims: &SystemDims, seed: u64) -> HermitianMatrix {
    random_density(dims, seed).into_hermitian()
}

pub(crate) fn check_start(x0: &HermitianMatrix, dims: &SystemDims) -> Result<()> {
    if x0.order() != dims.total() {
        return Err(Error::DimensionMismatch {
            context: "initial point order vs constraint dims",
            expected: dims.total(),
            found: x0.order(),
        });
    }
    Ok(())
}
