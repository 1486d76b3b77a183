//! JSON matrix and value-list files.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qmarg_core::{CMatrix, Complex64, HermitianMatrix, Spectrum, SystemDims};
use serde::{Deserialize, Serialize};

/// Largest tolerated `‖M − M*‖_F / max(1, ‖M‖_F)` for a Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Row-major complex entries as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValuesFile {
    pub values: Vec<f64>,
}

impl MatrixFile {
    pub fn from_matrix(dims: &SystemDims, m: &CMatrix) -> Self {
        let n = m.nrows();
        let entries = (0..n)
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        Self {
            dims: dims.dims().to_vec(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<(SystemDims, CMatrix)> {
        let dims = SystemDims::new(self.dims.clone())?;
        let n = dims.total();
        if self.entries.len() != n * n {
            bail!(
                "dims {:?} need {} entries, found {}",
                self.dims,
                n * n,
                self.entries.len()
            );
        }
        let values: Vec<Complex64> = self
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            bail!("matrix entries must be finite");
        }
        Ok((dims, CMatrix::from_row_slice(n, n, &values)))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_matrix(path: &Path) -> Result<(SystemDims, CMatrix)> {
    read_json::<MatrixFile>(path)?
        .to_matrix()
        .with_context(|| format!("invalid matrix in {}", path.display()))
}

/// Reads a matrix and rejects it unless it is Hermitian to rounding.
pub fn read_hermitian(path: &Path) -> Result<(SystemDims, HermitianMatrix)> {
    let (dims, m) = read_matrix(path)?;
    let defect = HermitianMatrix::hermitian_defect(&m) / m.norm().max(1.0);
    if defect > HERMITIAN_TOL {
        bail!(
            "{} is not Hermitian (relative defect {defect:.3e})",
            path.display()
        );
    }
    Ok((dims, HermitianMatrix::new(m)?))
}

pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let file: ValuesFile = read_json(path)?;
    if file.values.iter().any(|v| !v.is_finite()) {
        bail!("{} holds non-finite values", path.display());
    }
    Ok(file.values)
}

/// Spectra printed to a few decimals rarely sum to exactly one.
pub const SPECTRUM_SUM_TOL: f64 = 1e-2;

/// Reads a spectrum and rescales it to unit sum.
pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let values = read_values(path)?;
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > SPECTRUM_SUM_TOL {
        bail!("{} sums to {sum}, not 1", path.display());
    }
    Ok(Spectrum::normalized(values)?)
}

pub fn matrix_json(dims: &SystemDims, m: &CMatrix) -> Result<String> {
    Ok(serde_json::to_string(&MatrixFile::from_matrix(dims, m))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmarg_core::tensorcore::random_unitary;

    #[test]
    fn round_trip_is_bit_exact() {
        let dims = SystemDims::new(vec![2, 3]).unwrap();
        let u = random_unitary(6, 3);
        let file = MatrixFile::from_matrix(&dims, &u);
        let text = serde_json::to_string(&file).unwrap();
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        let (d, m) = back.to_matrix().unwrap();
        assert_eq!(d, dims);
        assert_eq!(m, u);
    }

    #[test]
    fn wrong_entry_count_is_rejected() {
        let file = MatrixFile {
            dims: vec![2],
            entries: vec![[1.0, 0.0]; 3],
        };
        assert!(file.to_matrix().is_err());
    }

    #[test]
    fn row_major_order() {
        let file = MatrixFile {
            dims: vec![2],
            entries: vec![[1.0, 0.0], [2.0, 0.5], [3.0, 0.0], [4.0, 0.0]],
        };
        let (_, m) = file.to_matrix().unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(2.0, 0.5));
        assert_eq!(m[(1, 0)], Complex64::new(3.0, 0.0));
    }
}
