use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::types::{CMatrix, HermitianMatrix};
use crate::{Error, Result};

/// Relative threshold for [`numerical_rank`].
pub const RANK_TOL: f64 = 1e-10;

const PHASE_TIE_TOL: f64 = 1e-12;

/// Spectral decomposition `H = U diag(values) U*` with values descending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigDecomposition {
    pub vectors: CMatrix,
    pub values: Vec<f64>,
}

impl EigDecomposition {
    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(&self.values)
    }

    /// `U diag(values) U*` with the stored eigenvectors and replacement values.
    pub fn reconstruct_with(&self, values: &[f64]) -> HermitianMatrix {
        assert_eq!(
            values.len(),
            self.vectors.ncols(),
            "one value per eigenvector"
        );
        let mut scaled = self.vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::symmetrized(scaled * self.vectors.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Values come out sorted descending. Each eigenvector is rotated so its
/// largest-magnitude entry (the first one, among near ties) is real and
/// positive, which makes the output deterministic.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigDecomposition> {
    let n = h.order();
    if n == 0 {
        return Ok(EigDecomposition {
            vectors: CMatrix::zeros(0, 0),
            values: Vec::new(),
        });
    }
    let eig = SymmetricEigen::try_new(h.as_matrix().clone(), f64::EPSILON, 1000 * n)
        .ok_or(Error::EigenFailure { order: n })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { order: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let anchor = col
            .iter()
            .position(|z| z.norm() >= peak - PHASE_TIE_TOL)
            .unwrap_or(0);
        let z = col[anchor];
        let phase = if z.norm() > 0.0 {
            z.conj() / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        vectors.set_column(dst, &(col * phase));
    }
    Ok(EigDecomposition { vectors, values })
}

/// Count of eigenvalues above `1e-10 · max(1, λ_max)`; `values` in any order.
pub fn numerical_rank(values: &[f64]) -> usize {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = RANK_TOL * top.max(1.0);
    values.iter().filter(|&&v| v > cut).count()
}
