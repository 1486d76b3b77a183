//! Fixture loading shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use qmarg_core::tensorcore::{numerical_rank, CMatrix};
use qmarg_core::{
    Complex64, ConstraintSet, DensityMatrix, HermitianMatrix, KeepSet, MarginalConstraint,
    Spectrum, SystemDims,
};
use serde_json::Value;

pub fn fixture_path(case: &str, name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(case)
        .join(format!("{name}.json"))
}

fn read(case: &str, name: &str) -> Value {
    let path = fixture_path(case, name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    serde_json::from_str(&text).expect("fixture is valid JSON")
}

fn entries(v: &Value) -> (Vec<usize>, Vec<Complex64>) {
    let dims = v["dims"]
        .as_array()
        .expect("dims")
        .iter()
        .map(|d| d.as_u64().expect("dimension") as usize)
        .collect();
    let entries = v["entries"]
        .as_array()
        .expect("entries")
        .iter()
        .map(|z| Complex64::new(z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
        .collect();
    (dims, entries)
}

pub fn matrix(case: &str, name: &str) -> (SystemDims, HermitianMatrix) {
    let (dims, entries) = entries(&read(case, name));
    let dims = SystemDims::new(dims).unwrap();
    let n = dims.total();
    assert_eq!(entries.len(), n * n, "{case}/{name} is not a matrix");
    let m = CMatrix::from_row_slice(n, n, &entries);
    (dims, HermitianMatrix::new(m).unwrap())
}

pub fn vector(case: &str, name: &str) -> nalgebra::DVector<Complex64> {
    let (_, entries) = entries(&read(case, name));
    nalgebra::DVector::from_vec(entries)
}

pub fn values(case: &str, name: &str) -> Vec<f64> {
    read(case, name)["values"]
        .as_array()
        .expect("values")
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

pub fn density(case: &str, name: &str) -> DensityMatrix {
    let (dims, m) = matrix(case, name);
    DensityMatrix::new(m, dims).unwrap()
}

pub fn diagonal_density(values: &[f64]) -> DensityMatrix {
    DensityMatrix::diagonal(values).unwrap()
}

pub fn normalized_spectrum(case: &str, name: &str) -> Spectrum {
    Spectrum::normalized(values(case, name)).unwrap()
}

/// Marginals on the last two and first two qubits of three.
pub fn tripartite_chain(case: &str) -> ConstraintSet {
    let (_, last) = matrix(case, "rho_last_two");
    let (_, first) = matrix(case, "rho_first_two");
    ConstraintSet::new(
        SystemDims::new(vec![2, 2, 2]).unwrap(),
        vec![
            MarginalConstraint::new(KeepSet::new([1, 2]), last),
            MarginalConstraint::new(KeepSet::new([0, 1]), first),
        ],
    )
    .unwrap()
}

/// Equal marginals on qubits (1, 2) and (1, 3) of three.
pub fn symmetric_extension() -> ConstraintSet {
    let (_, pair) = matrix("symmetric_extension", "rho_pair");
    ConstraintSet::new(
        SystemDims::new(vec![2, 2, 2]).unwrap(),
        vec![
            MarginalConstraint::new(KeepSet::new([0, 1]), pair.clone()),
            MarginalConstraint::new(KeepSet::new([0, 2]), pair),
        ],
    )
    .unwrap()
}

pub fn rank(h: &HermitianMatrix) -> usize {
    numerical_rank(&h.eigenvalues().unwrap())
}

pub fn largest_eigenvalue(h: &HermitianMatrix) -> f64 {
    h.eigenvalues()
        .unwrap()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}
