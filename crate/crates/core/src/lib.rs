//! Construction of multipartite quantum states with prescribed reduced states.
//!
//! The crate builds density matrices whose marginals (partial traces) match
//! given targets, optionally with extra structure: a prescribed spectrum, a
//! rank bound, or an extreme von Neumann / Rényi entropy.
//!
//! Modules:
//!
//! - [`tensorcore`]: Kronecker products, partial traces, subsystem
//!   permutations, Hermitian eigendecomposition and seeded random states.
//! - [`projections`]: Frobenius projections onto the marginal affine set, the
//!   fixed-spectrum orbit and the PSD cone, plus the consistency test.
//! - [`constructive`]: direct bipartite constructions (pure states,
//!   roots-of-unity rank-`k` states, the full rank sweep, interlacing and
//!   greedy min-matching decompositions).
//! - [`solvers`]: alternating projections, rank-capped alternation, Dykstra
//!   and semismooth Newton projections onto the feasible states, and a
//!   nonmonotone spectral projected gradient method for entropy objectives.
//! - [`entropy`]: von Neumann and Rényi entropies and their gradients.
//! - [`oracle`]: brute-force pseudo-inverse projections used to validate the
//!   closed-form affine projections.
//!
//! Subsystem indices are zero-based throughout the library.

#![forbid(unsafe_code)]

pub mod constructive;
pub mod entropy;
mod error;
pub mod oracle;
pub mod projections;
pub mod solvers;
pub mod tensorcore;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use projections::{ConsistencyReport, ConstraintSet, MarginalConstraint, Spectrum};
pub use solvers::{
    DykstraMode, InnerProjection, NspgOptions, Objective, SolveOptions, SolveReport,
};
pub use tensorcore::{
    CMatrix, DensityMatrix, EigDecomposition, HermitianMatrix, KeepSet, SystemDims,
};
