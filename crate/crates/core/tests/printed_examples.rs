//! The printed solutions satisfy their own problems to print precision.

mod common;

use common::*;
use qmarg_core::tensorcore::partial_trace;
use qmarg_core::{ConstraintSet, KeepSet};

const PRINT_TOL: f64 = 2e-3;

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn bipartite_solution_meets_marginals_and_spectrum() {
    let case = "prescribed_spectrum_2x3";
    let (_, r1) = matrix(case, "rho1");
    let (_, r2) = matrix(case, "rho2");
    let cs = ConstraintSet::bipartite(&r1, &r2).unwrap();
    let (_, x) = matrix(case, "printed_solution");
    assert!(cs.max_violation(&x).unwrap() < PRINT_TOL);
    let c = normalized_spectrum(case, "spectrum");
    let gap = max_gap(&sorted_desc(x.eigenvalues().unwrap()), c.values());
    assert!(gap < PRINT_TOL, "spectrum gap {gap}");
}

#[test]
fn chain_solution_meets_marginals() {
    let cs = tripartite_chain("tripartite_feasible");
    let (_, x) = matrix("tripartite_feasible", "printed_solution");
    let v = cs.max_violation(&x).unwrap();
    assert!(v < PRINT_TOL, "violation {v}");
    assert!(x.eigenvalues().unwrap().iter().all(|&e| e > -PRINT_TOL));
}

#[test]
fn symmetric_extension_solution_matches_one_of_two_marginals() {
    let (dims, x) = matrix("symmetric_extension", "printed_solution");
    let (_, pair) = matrix("symmetric_extension", "rho_pair");
    let reduced = |keep: [usize; 2]| {
        let m = partial_trace(&x, &dims, &KeepSet::new(keep)).unwrap();
        (m.as_matrix() - pair.as_matrix()).camax()
    };
    assert!(reduced([0, 1]) < 1e-12);
    // The other reduced state is off by 0.009 in one entry.
    let off = reduced([0, 2]);
    assert!(off > PRINT_TOL && off < 1e-2, "deviation {off}");
    assert!(x.eigenvalues().unwrap().iter().all(|&e| e > -PRINT_TOL));
}

#[test]
fn tripartite_solution_has_printed_spectrum() {
    let (_, x) = matrix("tripartite_spectrum", "printed_solution");
    let c = normalized_spectrum("tripartite_spectrum", "spectrum");
    let gap = max_gap(&sorted_desc(x.eigenvalues().unwrap()), c.values());
    assert!(gap < PRINT_TOL, "spectrum gap {gap}");
}

#[test]
fn prescribed_spectrum_solution_misses_stated_marginals() {
    // Every reduced state on two qubits is off by more than print rounding.
    let (dims, x) = matrix("tripartite_spectrum", "printed_solution");
    let (_, last) = matrix("tripartite_spectrum", "rho_last_two");
    let (_, first) = matrix("tripartite_spectrum", "rho_first_two");
    for keep in [[0, 1], [0, 2], [1, 2]] {
        let m = partial_trace(&x, &dims, &KeepSet::new(keep)).unwrap();
        assert!(m.distance(&last) > 0.05 && m.distance(&first) > 0.05);
    }
    let solved = qmarg_core::solvers::solve_with_spectrum(
        &tripartite_chain("tripartite_spectrum"),
        &normalized_spectrum("tripartite_spectrum", "spectrum"),
        &qmarg_core::SolveOptions {
            tolerance: 1e-10,
            max_iterations: 5000,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(solved.converged);
}

#[test]
fn feasible_tripartite_solution_has_rank_six() {
    let (_, x) = matrix("tripartite_feasible", "printed_solution");
    let big = x
        .eigenvalues()
        .unwrap()
        .iter()
        .filter(|&&e| e > PRINT_TOL)
        .count();
    assert_eq!(big, 6);
}

#[test]
fn printed_spectra_are_probability_vectors() {
    for (case, name) in [
        ("low_rank_3x4", "spectrum1"),
        ("low_rank_3x4", "spectrum2"),
        ("low_rank_3x6", "spectrum1"),
        ("low_rank_3x6", "spectrum2"),
        ("low_rank_6x8", "spectrum1"),
        ("low_rank_6x8", "spectrum2"),
        ("prescribed_spectrum_2x3", "spectrum"),
        ("tripartite_spectrum", "spectrum"),
    ] {
        let s: f64 = values(case, name).iter().sum();
        assert!((s - 1.0).abs() < 1e-3, "{case}/{name} sums to {s}");
    }
}
