//! Shared inputs for the benchmarks.

use qmarg_core::oracle::random_hermitian;
use qmarg_core::tensorcore::random_density;
use qmarg_core::{ConstraintSet, DensityMatrix, HermitianMatrix, KeepSet, Spectrum, SystemDims};

/// Random bipartite marginals of orders `n1` and `n2`.
pub fn bipartite_marginals(n1: usize, n2: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
    (
        random_density(&SystemDims::single(n1).expect("positive order"), seed),
        random_density(&SystemDims::single(n2).expect("positive order"), seed + 1),
    )
}

pub fn bipartite_problem(n1: usize, n2: usize, seed: u64) -> ConstraintSet {
    let (a, b) = bipartite_marginals(n1, n2, seed);
    ConstraintSet::bipartite(a.matrix(), b.matrix()).expect("matching orders")
}

/// Overlapping two-party marginals of a random state on `dims`: each
/// neighbouring pair of subsystems.
pub fn chain_problem(dims: &[usize], seed: u64) -> ConstraintSet {
    let dims = SystemDims::new(dims.to_vec()).expect("valid dims");
    let rho = random_density(&dims, seed);
    let keeps: Vec<KeepSet> = (0..dims.num_subsystems() - 1)
        .map(|i| KeepSet::new([i, i + 1]))
        .collect();
    ConstraintSet::from_state(&rho, &dims, &keeps).expect("valid keep-sets")
}

/// Spectrum of `a ⊗ b`; the product state makes it feasible for the
/// marginals `a`, `b`.
pub fn product_spectrum(a: &DensityMatrix, b: &DensityMatrix) -> Spectrum {
    let eb = b.matrix().eigenvalues().expect("Hermitian input");
    let values = a
        .matrix()
        .eigenvalues()
        .expect("Hermitian input")
        .iter()
        .flat_map(|x| eb.iter().map(move |y| x * y))
        .collect();
    Spectrum::normalized(values).expect("nonnegative spectrum")
}

pub fn hermitian(n: usize, seed: u64) -> HermitianMatrix {
    random_hermitian(n, seed)
}
