use num_complex::Complex64;

use super::types::{CMatrix, HermitianMatrix, KeepSet, SystemDims};
use crate::{Error, Result};

/// Kronecker product `A ⊗ B`: entry `(i·n_B + p, j·m_B + q)` is `A[i,j]·B[p,q]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Index bookkeeping that splits each full basis index into its kept and
/// traced parts.
///
/// `full(a, t)` is the full index whose kept subsystems read `a` and whose
/// traced subsystems read `t`, both in ascending subsystem order.
#[derive(Clone, Debug)]
pub(crate) struct SubsystemSplit {
    kept_dim: usize,
    traced_dim: usize,
    full: Vec<usize>,
}

impl SubsystemSplit {
    pub(crate) fn new(dims: &SystemDims, keep: &KeepSet) -> Self {
        let d = dims.dims();
        let kept_dim = dims.subsystem_total(keep);
        let traced_dim = dims.total() / kept_dim;
        let mut full = vec![0; dims.total()];
        let mut digits = vec![0usize; d.len()];
        for f in 0..dims.total() {
            let (mut kept, mut traced) = (0, 0);
            for (s, &digit) in digits.iter().enumerate() {
                if keep.contains(s) {
                    kept = kept * d[s] + digit;
                } else {
                    traced = traced * d[s] + digit;
                }
            }
            full[kept * traced_dim + traced] = f;
            for s in (0..d.len()).rev() {
                digits[s] += 1;
                if digits[s] < d[s] {
                    break;
                }
                digits[s] = 0;
            }
        }
        Self {
            kept_dim,
            traced_dim,
            full,
        }
    }

    pub(crate) fn kept_dim(&self) -> usize {
        self.kept_dim
    }

    pub(crate) fn traced_dim(&self) -> usize {
        self.traced_dim
    }

    #[inline]
    pub(crate) fn full(&self, kept: usize, traced: usize) -> usize {
        self.full[kept * self.traced_dim + traced]
    }

    /// `tr_{J^c}(m)` for a full-order matrix `m`.
    pub(crate) fn trace_out(&self, m: &CMatrix) -> CMatrix {
        let n = self.kept_dim;
        CMatrix::from_fn(n, n, |a, b| {
            (0..self.traced_dim)
                .map(|t| m[(self.full(a, t), self.full(b, t))])
                .sum()
        })
    }

    /// Adds `scale · P_J^T (I_{n_{J^c}} ⊗ d) P_J` into `out` in place.
    pub(crate) fn add_lifted(&self, out: &mut CMatrix, d: &CMatrix, scale: f64) {
        for t in 0..self.traced_dim {
            for a in 0..self.kept_dim {
                let row = self.full(a, t);
                for b in 0..self.kept_dim {
                    out[(row, self.full(b, t))] += d[(a, b)] * scale;
                }
            }
        }
    }

    /// `P_J^T (I_{n_{J^c}} ⊗ d) P_J`, the lift of a kept-space matrix to the
    /// full space acting as identity on the traced subsystems.
    pub(crate) fn lift(&self, d: &CMatrix) -> CMatrix {
        let total = self.kept_dim * self.traced_dim;
        let mut out = CMatrix::zeros(total, total);
        for t in 0..self.traced_dim {
            for a in 0..self.kept_dim {
                let row = self.full(a, t);
                for b in 0..self.kept_dim {
                    out[(row, self.full(b, t))] = d[(a, b)];
                }
            }
        }
        out
    }
}

fn check_order(m: &CMatrix, dims: &SystemDims) -> Result<()> {
    if m.nrows() != dims.total() || m.ncols() != dims.total() {
        return Err(Error::DimensionMismatch {
            context: "matrix order vs system dims",
            expected: dims.total(),
            found: m.nrows(),
        });
    }
    Ok(())
}

/// Reduced matrix on the subsystems in `keep`; an empty `keep` gives the 1×1
/// full trace.
pub(crate) fn trace_down(m: &CMatrix, dims: &SystemDims, keep: &KeepSet) -> Result<CMatrix> {
    check_order(m, dims)?;
    keep.check(dims)?;
    Ok(SubsystemSplit::new(dims, keep).trace_out(m))
}

/// `P_J^T (I/n_{J^c} ⊗ d) P_J` for a matrix `d` on the kept subsystems.
pub(crate) fn embed(d: &CMatrix, dims: &SystemDims, keep: &KeepSet) -> Result<CMatrix> {
    keep.check(dims)?;
    let split = SubsystemSplit::new(dims, keep);
    if d.nrows() != split.kept_dim() || d.ncols() != split.kept_dim() {
        return Err(Error::DimensionMismatch {
            context: "embedded block order vs kept dimension",
            expected: split.kept_dim(),
            found: d.nrows(),
        });
    }
    Ok(split.lift(d).unscale(split.traced_dim() as f64))
}

/// Partial trace over the complement of `keep`, returning the reduced matrix
/// on the kept subsystems in ascending order.
pub fn partial_trace(
    rho: &HermitianMatrix,
    dims: &SystemDims,
    keep: &KeepSet,
) -> Result<HermitianMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let reduced = trace_down(rho.as_matrix(), dims, keep)?;
    Ok(HermitianMatrix::symmetrized(reduced))
}

/// Permutation matrix `P_J` with `P_J (α_1⊗⋯⊗α_k) P_J^T` equal to the
/// product of the factors outside `J` followed by the factors in `J`.
pub fn subsystem_permutation(dims: &SystemDims, keep: &KeepSet) -> Result<CMatrix> {
    keep.check(dims)?;
    let split = SubsystemSplit::new(dims, keep);
    let n = dims.total();
    let mut p = CMatrix::zeros(n, n);
    for t in 0..split.traced_dim() {
        for a in 0..split.kept_dim() {
            p[(t * split.kept_dim() + a, split.full(a, t))] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(p)
}
