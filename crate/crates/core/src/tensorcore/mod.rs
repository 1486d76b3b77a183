//! Tensor-structured linear algebra on dense complex matrices.
//!
//! Basis ordering follows the Kronecker convention: for subsystems with
//! dimensions `(n_1, …, n_k)` the basis vector `e_{i_1} ⊗ ⋯ ⊗ e_{i_k}` sits
//! at the mixed-radix index with subsystem 0 most significant.

mod eig;
mod ops;
mod random;
mod types;

pub use eig::{hermitian_eig, numerical_rank, EigDecomposition, RANK_TOL};
pub use ops::{kron, partial_trace, subsystem_permutation};
pub use random::{random_density, random_probability_vector, random_unitary};
pub use types::{
    CMatrix, DensityMatrix, HermitianMatrix, KeepSet, Spectrum, SystemDims, DENSITY_TOL,
};

pub(crate) use ops::{embed, trace_down, SubsystemSplit};
