//! Brute-force reference projections for testing.
//!
//! Hermitian matrices are flattened to real vectors, marginal constraints
//! become an explicit linear system `A x = b`, and the affine projection is
//! `x − A⁺(Ax − b)` with a pseudo-inverse from the SVD. Intended for orders up
//! to 16.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::projections::ConstraintSet;
use crate::tensorcore::{partial_trace, CMatrix, HermitianMatrix, SystemDims};
use crate::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Least-squares residual above which the system is declared inconsistent.
pub const CONSISTENCY_RESIDUAL: f64 = 1e-8;

/// Marginal constraints as a real linear system on the flattened matrix.
#[derive(Clone, Debug)]
pub struct VectorizedConstraints {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub dims: SystemDims,
}

/// Real coordinates of `h`: the diagonal, then `√2·Re h_ij` and `√2·Im h_ij`
/// for each `i < j`. The Euclidean norm equals the Frobenius norm.
pub fn parametrize(h: &HermitianMatrix) -> DVector<f64> {
    let n = h.order();
    let m = h.as_matrix();
    let mut x = Vec::with_capacity(n * n);
    x.extend((0..n).map(|i| m[(i, i)].re));
    for i in 0..n {
        for j in i + 1..n {
            x.push(std::f64::consts::SQRT_2 * m[(i, j)].re);
            x.push(std::f64::consts::SQRT_2 * m[(i, j)].im);
        }
    }
    DVector::from_vec(x)
}

/// Inverse of [`parametrize`] for a matrix of order `n`.
pub fn unparametrize(x: &DVector<f64>, n: usize) -> HermitianMatrix {
    assert_eq!(x.len(), n * n, "parameter count must be n²");
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(x[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(x[k], x[k + 1]) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    HermitianMatrix::symmetrized(m)
}

/// One row per real parameter of each target.
pub fn vectorize_constraints(cs: &ConstraintSet) -> VectorizedConstraints {
    let dims = cs.dims().clone();
    let n = dims.total();
    let rows: usize = cs
        .constraints()
        .iter()
        .map(|c| c.target().order().pow(2))
        .sum();
    let mut a = DMatrix::zeros(rows, n * n);
    for col in 0..n * n {
        let basis = unparametrize(
            &DVector::from_fn(n * n, |i, _| if i == col { 1.0 } else { 0.0 }),
            n,
        );
        let mut row = 0;
        for c in cs.constraints() {
            let image =
                parametrize(&partial_trace(&basis, &dims, c.keep()).expect("validated constraint"));
            a.view_mut((row, col), (image.len(), 1)).copy_from(&image);
            row += image.len();
        }
    }
    let b = DVector::from_iterator(
        rows,
        cs.constraints()
            .iter()
            .flat_map(|c| parametrize(c.target()).data.as_vec().clone()),
    );
    VectorizedConstraints { a, b, dims }
}

/// Frobenius projection of `z` onto `{X : A vec(X) = b}`.
pub fn pseudoinverse_projection(
    z: &HermitianMatrix,
    vc: &VectorizedConstraints,
) -> Result<HermitianMatrix> {
    let n = vc.dims.total();
    if z.order() != n {
        return Err(Error::DimensionMismatch {
            context: "matrix order vs constraint dims",
            expected: n,
            found: z.order(),
        });
    }
    let x = parametrize(z);
    let svd = vc.a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let pinv = svd
        .pseudo_inverse(PINV_RELATIVE_CUTOFF * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let projected = &x - pinv * (&vc.a * &x - &vc.b);
    let residual = (&vc.a * &projected - &vc.b).norm();
    if residual > CONSISTENCY_RESIDUAL {
        return Err(Error::InconsistentSystem { residual });
    }
    Ok(unparametrize(&projected, n))
}

/// `max_y ⟨z − x*, y − x*⟩` over the samples; `−∞` for no samples.
///
/// For a convex set containing every sample, `x*` can only be the projection
/// of `z` if this is at most zero (up to round-off).
pub fn variational_inequality_check(
    z: &HermitianMatrix,
    x_star: &HermitianMatrix,
    feasible_samples: &[HermitianMatrix],
) -> f64 {
    let normal = z - x_star;
    feasible_samples
        .iter()
        .map(|y| normal.inner(&(y - x_star)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Hermitian matrix with independent standard complex Gaussian entries.
pub fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    HermitianMatrix::new(CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }))
    .expect("square by construction")
}

/// Points of the affine marginal set: oracle projections of random matrices.
pub fn affine_samples(cs: &ConstraintSet, count: usize, seed: u64) -> Result<Vec<HermitianMatrix>> {
    let vc = vectorize_constraints(cs);
    let n = cs.dims().total();
    (0..count as u64)
        .map(|i| pseudoinverse_projection(&random_hermitian(n, seed.wrapping_add(i)), &vc))
        .collect()
}
