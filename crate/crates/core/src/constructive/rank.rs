use nalgebra::DVector;
use num_complex::Complex64;

use super::{check_equal_traces, clipped_eig, kron_vec};
use crate::tensorcore::{
    kron, numerical_rank, CMatrix, DensityMatrix, EigDecomposition, HermitianMatrix, SystemDims,
};
use crate::{Error, Result};

/// `(1/s) Σ_i (u_i u_i*) ⊗ (v_i v_i*) / k` with `u_i[j] = ω^{ij} √a_j`,
/// `v_i[l] = ω^{il} √b_l`, `ω = e^{2πi/k}`, on the `p·q` product basis.
/// Requires `max(p, q) ≤ k`; the marginals are `diag(a)` and `diag(b)`.
fn fourier_state(a: &[f64], b: &[f64], k: usize) -> CMatrix {
    let s = 0.5 * (a.iter().sum::<f64>() + b.iter().sum::<f64>());
    let n = a.len() * b.len();
    let mut m = CMatrix::zeros(n, n);
    let root =
        |e: usize| Complex64::from_polar(1.0, std::f64::consts::TAU * (e % k) as f64 / k as f64);
    for i in 0..k {
        let u = DVector::from_fn(a.len(), |j, _| root(i * j) * a[j].sqrt());
        let v = DVector::from_fn(b.len(), |l, _| root(i * l) * b[l].sqrt());
        let z = kron_vec(&u, &v);
        m += &z * z.adjoint();
    }
    m.unscale(k as f64 * s)
}

fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

fn admissible_peel(p: usize, q: usize, k: usize) -> bool {
    q >= 2 && k >= p && (p.max(q - 1)..=p * (q - 1)).contains(&(k - p))
}

/// Rank-`k` PSD matrix on the `p·q` product basis with marginals `diag(a)`,
/// `diag(b)`, for positive `a`, `b` and `max(p, q) ≤ k ≤ p·q`.
///
/// Above `p + q − 1` the smallest eigenvalue of one side is split off as a
/// product block, which adds `p` (or `q`) to the rank, and the rest recurses.
fn sweep_diagonal(a: &[f64], b: &[f64], k: usize) -> CMatrix {
    let (p, q) = (a.len(), b.len());
    let s = 0.5 * (a.iter().sum::<f64>() + b.iter().sum::<f64>());
    if p == 1 || q == 1 {
        return kron(&diag(a), &diag(b)).unscale(s);
    }
    if k < p + q {
        return fourier_state(a, b, k);
    }
    let peel_b = admissible_peel(p, q, k) && (q >= p || !admissible_peel(q, p, k));
    let mut out = CMatrix::zeros(p * q, p * q);
    if peel_b {
        let last = b[q - 1];
        let scaled: Vec<f64> = a.iter().map(|v| v * (1.0 - last / s)).collect();
        let sub = sweep_diagonal(&scaled, &b[..q - 1], k - p);
        let q1 = q - 1;
        for r in 0..p * q1 {
            for c in 0..p * q1 {
                out[((r / q1) * q + r % q1, (c / q1) * q + c % q1)] = sub[(r, c)];
            }
        }
        for (i, &ai) in a.iter().enumerate() {
            out[(i * q + q1, i * q + q1)] = Complex64::new(ai * last / s, 0.0);
        }
    } else {
        assert!(
            admissible_peel(q, p, k),
            "rank {k} not reachable for sizes ({p}, {q})"
        );
        let last = a[p - 1];
        let scaled: Vec<f64> = b.iter().map(|v| v * (1.0 - last / s)).collect();
        let sub = sweep_diagonal(&a[..p - 1], &scaled, k - q);
        out.view_mut((0, 0), ((p - 1) * q, (p - 1) * q))
            .copy_from(&sub);
        for (j, &bj) in b.iter().enumerate() {
            let idx = (p - 1) * q + j;
            out[(idx, idx)] = Complex64::new(last * bj / s, 0.0);
        }
    }
    out
}

struct Reduced {
    n1: usize,
    n2: usize,
    e1: EigDecomposition,
    e2: EigDecomposition,
    r1: usize,
    r2: usize,
}

fn reduce(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<Reduced> {
    check_equal_traces(rho1, rho2)?;
    let (e1, e2) = (clipped_eig(rho1)?, clipped_eig(rho2)?);
    let (r1, r2) = (numerical_rank(&e1.values), numerical_rank(&e2.values));
    Ok(Reduced {
        n1: rho1.order(),
        n2: rho2.order(),
        e1,
        e2,
        r1,
        r2,
    })
}

impl Reduced {
    fn check_range(&self, k: usize, max: usize) -> Result<()> {
        let min = self.r1.max(self.r2);
        if k < min || k > max {
            return Err(Error::RankOutOfRange { k, min, max });
        }
        Ok(())
    }

    /// `(U_r ⊗ V_r) m (U_r ⊗ V_r)*` on the supports of the two marginals.
    fn embed(&self, m: &CMatrix) -> Result<DensityMatrix> {
        let u = self.e1.vectors.columns(0, self.r1).into_owned();
        let v = self.e2.vectors.columns(0, self.r2).into_owned();
        let w = kron(&u, &v);
        let full = &w * m * w.adjoint();
        DensityMatrix::new(
            HermitianMatrix::symmetrized(full),
            SystemDims::new(vec![self.n1, self.n2])?,
        )
    }
}

/// Rank-`k` state with marginals `ρ₁`, `ρ₂` from roots-of-unity phases, for
/// `max(r₁, r₂) ≤ k ≤ r₁ + r₂ − 1` where `r_i = rank ρ_i`.
pub fn rank_k_roots_of_unity(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    k: usize,
) -> Result<DensityMatrix> {
    let red = reduce(rho1, rho2)?;
    red.check_range(k, red.r1 + red.r2 - 1)?;
    let m = fourier_state(&red.e1.values[..red.r1], &red.e2.values[..red.r2], k);
    red.embed(&m)
}

/// Rank-`k` state with marginals `ρ₁`, `ρ₂` for any
/// `max(r₁, r₂) ≤ k ≤ r₁ · r₂`.
pub fn rank_sweep(rho1: &DensityMatrix, rho2: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    let red = reduce(rho1, rho2)?;
    red.check_range(k, red.r1 * red.r2)?;
    let m = sweep_diagonal(&red.e1.values[..red.r1], &red.e2.values[..red.r2], k);
    red.embed(&m)
}
