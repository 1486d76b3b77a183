//! Direct constructions of bipartite states with prescribed marginals.
//!
//! Inputs are the two reduced states `ρ₁` (first factor) and `ρ₂` (second
//! factor); outputs live on `C^{n₁} ⊗ C^{n₂}`.

mod decompose;
mod downdate;
mod rank;

pub use decompose::{greedy_minmatch, interlace_decomposition};
pub use downdate::rank_one_downdate;
pub use rank::{rank_k_roots_of_unity, rank_sweep};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::tensorcore::{
    numerical_rank, CMatrix, DensityMatrix, EigDecomposition, HermitianMatrix, SystemDims,
};
use crate::{Error, Result};

/// Eigenvalues at or below this are treated as zero by the constructions.
pub const ZERO_TOL: f64 = 1e-12;

/// Spectral mismatch allowed between isospectral inputs.
pub const ISOSPECTRAL_TOL: f64 = 1e-8;

/// Splits of `ρ₁ = Σ C_i` and `ρ₂ = Σ C̃_i` into isospectral PSD pairs, with
/// the vectors `w_i` whose outer products sum to the constructed state.
#[derive(Clone, Debug)]
pub struct IsospectralDecomposition {
    pub pairs: Vec<(HermitianMatrix, HermitianMatrix)>,
    /// `tr C_i`.
    pub weights: Vec<f64>,
    pub vectors: Vec<DVector<Complex64>>,
}

impl IsospectralDecomposition {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Gram matrix `[w_i* w_j]`.
    pub fn gram(&self) -> CMatrix {
        let k = self.vectors.len();
        CMatrix::from_fn(k, k, |i, j| self.vectors[i].dotc(&self.vectors[j]))
    }
}

/// A unit vector in `C^{n₁n₂}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector(DVector<Complex64>);

impl PureStateVector {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "state vector has norm {norm}"
            )));
        }
        Ok(Self(amplitudes))
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn density(&self, dims: SystemDims) -> Result<DensityMatrix> {
        DensityMatrix::new(HermitianMatrix::outer(&self.0), dims)
    }
}

/// `u ⊗ v` for column vectors.
pub(crate) fn kron_vec(u: &DVector<Complex64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let n2 = v.len();
    DVector::from_fn(u.len() * n2, |r, _| u[r / n2] * v[r % n2])
}

/// Sum of outer products `Σ w w*` as a state on `(n₁, n₂)`.
pub(crate) fn state_from_vectors(
    vectors: &[DVector<Complex64>],
    n1: usize,
    n2: usize,
) -> Result<DensityMatrix> {
    let n = n1 * n2;
    let mut m = CMatrix::zeros(n, n);
    for w in vectors {
        m += w * w.adjoint();
    }
    DensityMatrix::new(
        HermitianMatrix::symmetrized(m),
        SystemDims::new(vec![n1, n2])?,
    )
}

/// Eigendecomposition with negative round-off clipped to zero.
pub(crate) fn clipped_eig(rho: &HermitianMatrix) -> Result<EigDecomposition> {
    let mut e = rho.eig()?;
    for v in &mut e.values {
        *v = v.max(0.0);
    }
    Ok(e)
}

/// Largest entrywise gap between the two spectra, zero-padded to equal length.
fn spectral_mismatch(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn check_equal_traces(rho1: &HermitianMatrix, rho2: &HermitianMatrix) -> Result<()> {
    let gap = (rho1.trace() - rho2.trace()).abs();
    if gap > crate::tensorcore::DENSITY_TOL {
        return Err(Error::InconsistentConstraints {
            max_discrepancy: gap,
        });
    }
    Ok(())
}

/// Unit vector `w = Σ √γ_i (x_i ⊗ y_i)` over the common nonzero eigenvalues
/// `γ_i` of isospectral `ρ₁`, `ρ₂` with eigenvectors `x_i`, `y_i`.
pub fn pure_state_vector(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<PureStateVector> {
    let (e1, e2) = (clipped_eig(rho1)?, clipped_eig(rho2)?);
    let mismatch = spectral_mismatch(&e1.values, &e2.values);
    if mismatch > ISOSPECTRAL_TOL {
        return Err(Error::NotIsospectral { mismatch });
    }
    let r = numerical_rank(&e1.values).max(numerical_rank(&e2.values));
    let mut w = DVector::zeros(rho1.order() * rho2.order());
    for i in 0..r {
        let gamma = 0.5 * (e1.values[i] + e2.values[i]);
        w += kron_vec(
            &e1.vectors.column(i).into_owned(),
            &e2.vectors.column(i).into_owned(),
        ) * Complex64::new(gamma.sqrt(), 0.0);
    }
    let norm = w.norm();
    PureStateVector::new(w.unscale(norm))
}

/// The rank-one state `w w*` of [`pure_state_vector`].
pub fn pure_state_from_isospectral(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<DensityMatrix> {
    pure_state_vector(rho1, rho2)?.density(SystemDims::new(vec![rho1.order(), rho2.order()])?)
}
