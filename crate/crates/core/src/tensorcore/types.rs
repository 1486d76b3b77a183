use std::fmt;
use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::eig::{hermitian_eig, EigDecomposition};
use crate::{Error, Result};

/// Dense complex matrix used for all state-space arithmetic.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for the unit-trace and PSD checks of [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;

/// Ordered subsystem dimensions `(n_1, …, n_k)` of a tensor product space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemDims {
    dims: Vec<usize>,
    total: usize,
}

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims(
                "at least one subsystem is required".into(),
            ));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidDims(format!(
                "subsystem {} has dimension 0",
                pos + 1
            )));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidDims("total dimension overflows".into()))?;
        Ok(Self { dims, total })
    }

    /// A single system of dimension `n`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of subsystems `k`.
    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension `N = n_1 ⋯ n_k`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Product of the dimensions of the subsystems in `keep`; 1 for the empty set.
    pub fn subsystem_total(&self, keep: &KeepSet) -> usize {
        keep.iter().map(|i| self.dims[i]).product()
    }

    /// Dimensions of the kept subsystems, in ascending index order.
    pub fn restrict(&self, keep: &KeepSet) -> Result<SystemDims> {
        keep.check(self)?;
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        SystemDims::new(keep.iter().map(|i| self.dims[i]).collect())
    }

    /// The set of every subsystem index.
    pub fn all(&self) -> KeepSet {
        KeepSet::new(0..self.dims.len())
    }
}

impl fmt::Display for SystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A set of zero-based subsystem indices, stored sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeepSet(Vec<usize>);

impl KeepSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Builds a set from one-based indices as written in the CLI (`1,3`).
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidKeepSet(
                "subsystem indices are one-based".into(),
            ));
        }
        Ok(Self::new(indices.iter().map(|i| i - 1)))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Indices of `0..k` not in this set.
    pub fn complement(&self, k: usize) -> KeepSet {
        KeepSet((0..k).filter(|i| !self.contains(*i)).collect())
    }

    pub fn intersection(&self, other: &KeepSet) -> KeepSet {
        KeepSet(self.iter().filter(|i| other.contains(*i)).collect())
    }

    pub fn is_subset(&self, other: &KeepSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Positions of this set's elements inside `outer`, i.e. the same
    /// subsystems addressed relative to the reduced space on `outer`.
    pub fn positions_within(&self, outer: &KeepSet) -> Option<KeepSet> {
        self.iter()
            .map(|i| outer.0.binary_search(&i).ok())
            .collect::<Option<Vec<_>>>()
            .map(KeepSet)
    }

    pub(crate) fn check(&self, dims: &SystemDims) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= dims.num_subsystems() => Err(Error::InvalidKeepSet(format!(
                "subsystem {} out of range for {} subsystems",
                max + 1,
                dims.num_subsystems()
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KeepSet {
    /// One-based, e.g. `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Real values sorted in nonincreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values` descending; rejects non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite entry".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    /// A probability vector: entries nonnegative, summing to 1 within 1e-10.
    pub fn probability(values: Vec<f64>) -> Result<Self> {
        let s = Self::new(values)?;
        s.check_probability()?;
        Ok(s)
    }

    /// Rescales nonnegative `values` to unit sum. Used for spectra transcribed
    /// to a few decimals whose printed sum is off by rounding.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let s = Self::new(values)?;
        let sum = s.sum();
        if s.values.iter().any(|&v| v < 0.0) || sum <= 0.0 {
            return Err(Error::InvalidSpectrum(
                "cannot normalize: negative entries or zero sum".into(),
            ));
        }
        Ok(Self {
            values: s.values.iter().map(|v| v / sum).collect(),
        })
    }

    pub fn check_probability(&self) -> Result<()> {
        if let Some(v) = self.values.iter().find(|&&v| v < -DENSITY_TOL) {
            return Err(Error::InvalidSpectrum(format!("negative entry {v}")));
        }
        let sum = self.sum();
        if (sum - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidSpectrum(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// A dense complex Hermitian matrix.
///
/// Construction symmetrizes the input as `(H + H*)/2`, so the stored matrix
/// is Hermitian to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        let adj = m.adjoint();
        Self((m + adj).unscale(2.0))
    }

    /// Builds from a real symmetric matrix given as rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        }))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let d =
            DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self(CMatrix::from_diagonal(&d))
    }

    /// The rank-one projector `v v*` (unnormalized).
    pub fn outer(v: &DVector<Complex64>) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real Frobenius inner product `Re tr(A* B)`.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn distance(&self, other: &HermitianMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(m: &CMatrix) -> f64 {
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eig(&self) -> Result<EigDecomposition> {
        hermitian_eig(self)
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    /// `f(H)` through the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let e = self.eig()?;
        let values: Vec<f64> = e.values.iter().map(|&v| f(v)).collect();
        Ok(e.reconstruct_with(&values))
    }

    pub fn kron(&self, other: &HermitianMatrix) -> Self {
        Self::symmetrized(super::ops::kron(&self.0, &other.0))
    }
}

impl AsRef<HermitianMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        self
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Add for HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0 + rhs.0)
    }
}

impl Sub for HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0 - rhs.0)
    }
}

impl AddAssign<&HermitianMatrix> for HermitianMatrix {
    fn add_assign(&mut self, rhs: &HermitianMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&HermitianMatrix> for HermitianMatrix {
    fn sub_assign(&mut self, rhs: &HermitianMatrix) {
        self.0 -= &rhs.0;
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix(-&self.0)
    }
}

/// A quantum state: a unit-trace PSD Hermitian matrix on a tensor product space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    dims: SystemDims,
}

impl DensityMatrix {
    /// Validates trace 1 and minimum eigenvalue ≥ −1e-10.
    pub fn new(matrix: HermitianMatrix, dims: SystemDims) -> Result<Self> {
        if matrix.order() != dims.total() {
            return Err(Error::DimensionMismatch {
                context: "density matrix order vs system dims",
                expected: dims.total(),
                found: matrix.order(),
            });
        }
        let tr = matrix.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let min = matrix.eigenvalues()?.last().copied().unwrap_or(0.0);
        if min < -DENSITY_TOL {
            return Err(Error::NotDensity(format!(
                "minimum eigenvalue {min:.3e} is negative"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// A single-system state.
    pub fn single(matrix: HermitianMatrix) -> Result<Self> {
        let dims = SystemDims::single(matrix.order())?;
        Self::new(matrix, dims)
    }

    /// Diagonal single-system state with the given probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::single(HermitianMatrix::from_diagonal(probabilities))
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.matrix
    }

    /// `self ⊗ other`, with the subsystem lists concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.dims().to_vec();
        dims.extend_from_slice(other.dims.dims());
        DensityMatrix {
            matrix: self.matrix.kron(&other.matrix),
            dims: SystemDims::new(dims).expect("concatenated dims are valid"),
        }
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

impl AsRef<HermitianMatrix> for DensityMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_reject_zero_and_empty() {
        assert!(SystemDims::new(vec![]).is_err());
        assert!(SystemDims::new(vec![2, 0]).is_err());
        let d = SystemDims::new(vec![2, 3, 4]).unwrap();
        assert_eq!(d.total(), 24);
        assert_eq!(d.subsystem_total(&KeepSet::new([0, 2])), 8);
        assert_eq!(d.subsystem_total(&KeepSet::empty()), 1);
    }

    #[test]
    fn keep_set_algebra() {
        let j = KeepSet::new([2, 0, 2]);
        assert_eq!(j.indices(), &[0, 2]);
        assert_eq!(j.complement(3).indices(), &[1]);
        assert_eq!(j.intersection(&KeepSet::new([1, 2])).indices(), &[2]);
        assert_eq!(
            KeepSet::new([2]).positions_within(&j).unwrap().indices(),
            &[1]
        );
        assert!(KeepSet::new([1]).positions_within(&j).is_none());
        assert_eq!(j.to_string(), "{1,3}");
        assert!(KeepSet::from_one_based(&[0]).is_err());
    }

    #[test]
    fn hermitian_construction_symmetrizes() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.3),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let h = HermitianMatrix::new(m).unwrap();
        assert!(HermitianMatrix::hermitian_defect(h.as_matrix()) <= 1e-12);
        assert_eq!(h.as_matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        assert!(HermitianMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.5]).is_ok());
        assert!(matches!(
            DensityMatrix::diagonal(&[0.6, 0.5]),
            Err(Error::NotDensity(_))
        ));
        assert!(matches!(
            DensityMatrix::diagonal(&[1.2, -0.2]),
            Err(Error::NotDensity(_))
        ));
    }

    #[test]
    fn spectrum_sorting_and_probability() {
        let s = Spectrum::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(s.values(), &[0.5, 0.3, 0.2]);
        assert!(s.check_probability().is_ok());
        assert!(Spectrum::probability(vec![0.5, 0.6]).is_err());
        assert!(Spectrum::probability(vec![1.1, -0.1]).is_err());
        let n = Spectrum::normalized(vec![0.5, 0.5001]).unwrap();
        assert!((n.sum() - 1.0).abs() < 1e-15);
    }
}
