use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{
    check_equal_traces, clipped_eig, kron_vec, rank_one_downdate, state_from_vectors,
    IsospectralDecomposition, ZERO_TOL,
};
use crate::tensorcore::{CMatrix, DensityMatrix, HermitianMatrix};
use crate::Result;

/// Sum of nonnegative remainders below which the greedy rounds stop.
const GREEDY_STOP: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    side: Side,
    index: usize,
    value: f64,
}

/// Alternating chains `x₁ ≥ y₁ ≥ x₂ ≥ y₂ ≥ ⋯` (even length, labels
/// alternating) extracted greedily from the largest remaining value.
/// Chains starting on side A downdate A; those starting on B downdate B.
fn extract_chains(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<Vec<Entry>> {
    let mut pool: Vec<Entry> = a
        .iter()
        .map(|&(index, value)| Entry {
            side: Side::A,
            index,
            value,
        })
        .chain(b.iter().map(|&(index, value)| Entry {
            side: Side::B,
            index,
            value,
        }))
        .collect();
    // Descending by value, A before B on ties.
    pool.sort_by(|x, y| {
        y.value
            .total_cmp(&x.value)
            .then((x.side == Side::B).cmp(&(y.side == Side::B)))
    });
    let mut chains = Vec::new();
    while !pool.is_empty() {
        let start = pool.remove(0);
        let mut chain = vec![start];
        loop {
            let cur = *chain.last().expect("chain is nonempty");
            let want = if cur.side == Side::A {
                Side::B
            } else {
                Side::A
            };
            match pool
                .iter()
                .position(|e| e.side == want && e.value <= cur.value)
            {
                Some(pos) => chain.push(pool.remove(pos)),
                None => break,
            }
        }
        if chain.len() == 1 {
            continue;
        }
        if chain.len() % 2 == 1 {
            let back = chain.pop().expect("odd chain has a tail");
            let pos = pool.partition_point(|e| {
                e.value > back.value
                    || (e.value == back.value && e.side == Side::A && back.side == Side::B)
            });
            pool.insert(pos, back);
        }
        chains.push(chain);
    }
    chains
}

/// Adds `block` into `out` at rows/columns `idx`.
fn scatter(out: &mut DMatrix<f64>, idx: &[usize], block: &DMatrix<f64>) {
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[(i, j)] += block[(r, c)];
        }
    }
}

/// `diag(top) − d dᵀ` with `d` from the rank-one downdate onto `bottom`.
fn downdated_block(top: &[f64], bottom: &[f64]) -> Result<DMatrix<f64>> {
    let d = rank_one_downdate(top, bottom)?;
    let dv = DVector::from_vec(d);
    Ok(DMatrix::from_diagonal(&DVector::from_column_slice(top)) - &dv * dv.transpose())
}

fn conjugate(u: &CMatrix, real: &DMatrix<f64>) -> HermitianMatrix {
    let m = real.map(|x| Complex64::new(x, 0.0));
    HermitianMatrix::symmetrized(u * m * u.adjoint())
}

fn nonzero(values: &[f64]) -> Vec<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > ZERO_TOL)
        .collect()
}

/// `w = Σ_j √α_j (U_C e_j ⊗ V_C̃ e_j)` pairing the eigenvectors of an
/// isospectral pair in descending order.
fn pair_vector(c: &HermitianMatrix, ct: &HermitianMatrix) -> Result<DVector<Complex64>> {
    let (ec, et) = (clipped_eig(c)?, clipped_eig(ct)?);
    let mut w = DVector::zeros(c.order() * ct.order());
    for j in 0..c.order().min(ct.order()) {
        let alpha = ec.values[j];
        if alpha <= ZERO_TOL {
            break;
        }
        w += kron_vec(
            &ec.vectors.column(j).into_owned(),
            &et.vectors.column(j).into_owned(),
        ) * Complex64::new(alpha.sqrt(), 0.0);
    }
    Ok(w)
}

/// Splits `ρ₁`, `ρ₂` into isospectral pairs by repeated interlacing
/// downdates, then glues each pair into a vector `w_i`; returns
/// `ρ = Σ w_i w_i*` and the decomposition.
pub fn interlace_decomposition(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<(DensityMatrix, IsospectralDecomposition)> {
    check_equal_traces(rho1, rho2)?;
    let (n1, n2) = (rho1.order(), rho2.order());
    let mut a_k = rho1.matrix().clone();
    let mut b_k = rho2.matrix().clone();
    let mut pairs = Vec::new();
    for _ in 0..=(n1 + n2) {
        let (ea, eb) = (clipped_eig(&a_k)?, clipped_eig(&b_k)?);
        let (a, b) = (nonzero(&ea.values), nonzero(&eb.values));
        if a.is_empty() || b.is_empty() {
            break;
        }
        let mut c = DMatrix::<f64>::zeros(n1, n1);
        let mut ct = DMatrix::<f64>::zeros(n2, n2);
        for chain in extract_chains(&a, &b) {
            let tops: Vec<f64> = chain.iter().step_by(2).map(|e| e.value).collect();
            let bottoms: Vec<f64> = chain.iter().skip(1).step_by(2).map(|e| e.value).collect();
            let top_idx: Vec<usize> = chain.iter().step_by(2).map(|e| e.index).collect();
            let bottom_idx: Vec<usize> = chain.iter().skip(1).step_by(2).map(|e| e.index).collect();
            let block = downdated_block(&tops, &bottoms)?;
            let plain = DMatrix::from_diagonal(&DVector::from_vec(bottoms.clone()));
            if chain[0].side == Side::A {
                scatter(&mut c, &top_idx, &block);
                scatter(&mut ct, &bottom_idx, &plain);
            } else {
                scatter(&mut ct, &top_idx, &block);
                scatter(&mut c, &bottom_idx, &plain);
            }
        }
        let c = conjugate(&ea.vectors, &c);
        let ct = conjugate(&eb.vectors, &ct);
        a_k -= &c;
        b_k -= &ct;
        pairs.push((c, ct));
    }
    finish(pairs, n1, n2)
}

fn finish(
    pairs: Vec<(HermitianMatrix, HermitianMatrix)>,
    n1: usize,
    n2: usize,
) -> Result<(DensityMatrix, IsospectralDecomposition)> {
    let vectors = pairs
        .iter()
        .map(|(c, ct)| pair_vector(c, ct))
        .collect::<Result<Vec<_>>>()?;
    let weights = pairs.iter().map(|(c, _)| c.trace()).collect();
    let rho = state_from_vectors(&vectors, n1, n2)?;
    Ok((
        rho,
        IsospectralDecomposition {
            pairs,
            weights,
            vectors,
        },
    ))
}

/// Stable descending order of `values`.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order
}

/// Greedy min-matching: each round pairs the sorted remainders position by
/// position, takes `c_j = min(a_j, b_j)` and subtracts. The vectors `w_r`
/// are orthogonal, so `ρ = Σ w_r w_r*` has eigenvalues `tr C_r`, and the
/// first round attains the largest spectral norm over all states with these
/// marginals.
pub fn greedy_minmatch(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<(DensityMatrix, IsospectralDecomposition)> {
    check_equal_traces(rho1, rho2)?;
    let (n1, n2) = (rho1.order(), rho2.order());
    let (e1, e2) = (clipped_eig(rho1)?, clipped_eig(rho2)?);
    let mut a = e1.values.clone();
    let mut b = e2.values.clone();
    let m = n1.min(n2);
    let mut pairs = Vec::new();
    let mut vectors = Vec::new();
    for _ in 0..=(n1 + n2) {
        if a.iter().sum::<f64>() <= GREEDY_STOP {
            break;
        }
        let (sa, sb) = (descending_order(&a), descending_order(&b));
        let c: Vec<f64> = (0..m).map(|j| a[sa[j]].min(b[sb[j]])).collect();
        if c.iter().all(|&x| x <= 0.0) {
            break;
        }
        let mut ca = vec![0.0; n1];
        let mut cb = vec![0.0; n2];
        let mut w = DVector::zeros(n1 * n2);
        for j in 0..m {
            if c[j] <= 0.0 {
                continue;
            }
            a[sa[j]] -= c[j];
            b[sb[j]] -= c[j];
            ca[sa[j]] = c[j];
            cb[sb[j]] = c[j];
            let term = kron_vec(
                &e1.vectors.column(sa[j]).into_owned(),
                &e2.vectors.column(sb[j]).into_owned(),
            );
            w += term * Complex64::new(c[j].sqrt(), 0.0);
        }
        pairs.push((
            conjugate(&e1.vectors, &DMatrix::from_diagonal(&DVector::from_vec(ca))),
            conjugate(&e2.vectors, &DMatrix::from_diagonal(&DVector::from_vec(cb))),
        ));
        vectors.push(w);
    }
    let weights = pairs.iter().map(|(c, _)| c.trace()).collect();
    let rho = state_from_vectors(&vectors, n1, n2)?;
    Ok((
        rho,
        IsospectralDecomposition {
            pairs,
            weights,
            vectors,
        },
    ))
}
