//! End-to-end solver behaviour through the public API.

mod common;

use common::*;
use qmarg_core::entropy::von_neumann;
use qmarg_core::oracle::{random_hermitian, variational_inequality_check};
use qmarg_core::projections::check_consistency;
use qmarg_core::solvers::{
    dykstra_project, newton_project, nspg_minimize, solve_feasible, solve_with_rank_cap,
};
use qmarg_core::tensorcore::{random_density, random_unitary};
use qmarg_core::{
    ConstraintSet, DensityMatrix, DykstraMode, HermitianMatrix, Objective, SolveOptions, SystemDims,
};

fn opts(seed: u64) -> SolveOptions {
    SolveOptions {
        seed,
        tolerance: 1e-10,
        max_iterations: 5000,
        ..SolveOptions::default()
    }
}

#[test]
fn printed_marginals_are_consistent() {
    for cs in [
        tripartite_chain("tripartite_feasible"),
        symmetric_extension(),
    ] {
        let report = check_consistency(&cs, 1e-10);
        assert!(report.consistent, "discrepancy {}", report.max_discrepancy);
    }
}

#[test]
fn restarts_are_deterministic_and_ordered() {
    let cs = symmetric_extension();
    let o = SolveOptions {
        restarts: 4,
        ..opts(3)
    };
    let a = solve_feasible(&cs, &o).unwrap();
    let b = solve_feasible(&cs, &o).unwrap();
    assert_eq!(a.solution, b.solution);
    assert_eq!(a.residual_history, b.residual_history);
    assert_eq!(a.seed, 3);
    let single = solve_feasible(&cs, &opts(3)).unwrap();
    assert_eq!(single.solution, a.solution);
}

#[test]
fn rank_cap_two_on_hand_built_example() {
    let r1 = density("rank_two_by_hand", "rho1");
    let r2 = density("rank_two_by_hand", "rho2");
    let cs = ConstraintSet::bipartite(r1.matrix(), r2.matrix()).unwrap();
    let rep = solve_with_rank_cap(
        &cs,
        2,
        &SolveOptions {
            restarts: 8,
            max_iterations: 20000,
            ..opts(0)
        },
    )
    .unwrap();
    assert!(rep.converged);
    assert_eq!(rank(&rep.solution), 2);
}

#[test]
fn projections_onto_feasible_states_agree() {
    let cs = tripartite_chain("tripartite_feasible");
    let z = random_hermitian(8, 11).scale(0.3);
    let d = dykstra_project(
        &z,
        &cs,
        &SolveOptions {
            tolerance: 1e-12,
            max_iterations: 50000,
            ..SolveOptions::default()
        },
    )
    .unwrap();
    let n = newton_project(&z, &cs, &SolveOptions::default()).unwrap();
    assert!(d.converged && n.converged);
    assert!(d.solution.distance(&n.solution) < 1e-8);
    let samples: Vec<HermitianMatrix> = (0..10)
        .map(|s| solve_feasible(&cs, &opts(100 + s)).unwrap().solution)
        .collect();
    assert!(variational_inequality_check(&z, &n.solution, &samples) < 1e-8);
}

#[test]
fn plain_alternation_lands_in_the_set() {
    let cs = symmetric_extension();
    let z = random_hermitian(8, 5);
    let rep = dykstra_project(
        &z,
        &cs,
        &SolveOptions {
            dykstra_mode: DykstraMode::Plain,
            max_iterations: 50000,
            ..opts(0)
        },
    )
    .unwrap();
    assert!(rep.converged);
    assert!(cs.residual(&rep.solution).unwrap() < 1e-8);
    assert!(rep
        .solution
        .eigenvalues()
        .unwrap()
        .iter()
        .all(|&e| e > -1e-8));
}

#[test]
fn nspg_on_isospectral_qubits() {
    let u = random_unitary(2, 4);
    let base = HermitianMatrix::from_diagonal(&[0.8, 0.2]);
    let rotated = HermitianMatrix::new(&u * base.as_matrix() * u.adjoint()).unwrap();
    let cs = ConstraintSet::bipartite(&base, &rotated).unwrap();
    let rep = nspg_minimize(&cs, Objective::VonNeumann, &opts(1)).unwrap();
    assert!(rep.converged);
    let s = von_neumann(&rep.solution).unwrap();
    let bound = 2.0 * von_neumann(&base).unwrap();
    assert!(s <= bound + 1e-8 && s >= 0.0);
    assert!(rep.objective_history.last().unwrap() <= rep.objective_history.first().unwrap());
}

#[test]
fn nspg_renyi_on_random_marginals() {
    let r1 = random_density(&SystemDims::single(2).unwrap(), 1);
    let r2 = random_density(&SystemDims::single(3).unwrap(), 2);
    let cs = ConstraintSet::bipartite(r1.matrix(), r2.matrix()).unwrap();
    for alpha in [0.5, 2.0] {
        let rep = nspg_minimize(&cs, Objective::Renyi(alpha), &opts(0)).unwrap();
        assert!(rep.converged, "order {alpha}");
        assert!(cs.residual(&rep.solution).unwrap() < 1e-9);
        let first = rep.objective_history[0];
        assert!(*rep.objective_history.last().unwrap() <= first);
    }
}

#[test]
fn solution_is_a_density_matrix() {
    let cs = tripartite_chain("tripartite_feasible");
    let rep = solve_feasible(&cs, &opts(7)).unwrap();
    let dims = SystemDims::new(vec![2, 2, 2]).unwrap();
    assert!(DensityMatrix::new(rep.solution, dims).is_ok());
}
