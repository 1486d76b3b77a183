use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::types::{CMatrix, DensityMatrix, HermitianMatrix, Spectrum, SystemDims};

const UNITARY_STREAM: u64 = 0;
const PROBABILITY_STREAM: u64 = 1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

pub(crate) fn flat_dirichlet<R: Rng>(n: usize, rng: &mut R) -> Spectrum {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = draws.iter().sum();
    let mut p: Vec<f64> = draws.iter().map(|x| x / sum).collect();
    p.sort_by(|a, b| b.total_cmp(a));
    Spectrum::new(p).expect("normalized exponentials form a valid spectrum")
}

/// Haar-distributed `n×n` unitary, deterministic in `seed`.
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    haar_unitary(n, &mut rng_for(seed, UNITARY_STREAM))
}

/// Uniformly distributed point of the probability simplex, sorted descending.
pub fn random_probability_vector(n: usize, seed: u64) -> Spectrum {
    flat_dirichlet(n, &mut rng_for(seed, PROBABILITY_STREAM))
}

/// `U diag(p) U*` with `U = random_unitary(N, seed)` and
/// `p = random_probability_vector(N, seed)`.
pub fn random_density(dims: &SystemDims, seed: u64) -> DensityMatrix {
    let n = dims.total();
    let u = random_unitary(n, seed);
    let p = random_probability_vector(n, seed);
    let d = DVector::from_iterator(n, p.values().iter().map(|&v| Complex64::new(v, 0.0)));
    let m = &u * CMatrix::from_diagonal(&d) * u.adjoint();
    DensityMatrix::new(HermitianMatrix::symmetrized(m), dims.clone())
        .expect("unitary conjugate of a probability vector is a density matrix")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitarity_defect(u: &CMatrix) -> f64 {
        let n = u.nrows();
        (u.adjoint() * u - CMatrix::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn scalar_unitary_has_unit_modulus() {
        let u = random_unitary(1, 5);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitaries_are_unitary_and_reproducible() {
        for seed in 0..20 {
            let u = random_unitary(6, seed);
            assert!(unitarity_defect(&u) < 1e-12);
            assert_eq!(u, random_unitary(6, seed));
        }
        assert_ne!(random_unitary(3, 1), random_unitary(3, 2));
    }

    #[test]
    fn haar_first_entry_moments() {
        // For Haar U of order n, E|U_00|^2 = 1/n.
        let n = 4;
        let trials = 4000;
        let mean: f64 = (0..trials)
            .map(|s| random_unitary(n, s)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn probability_vectors() {
        assert_eq!(random_probability_vector(1, 3).values(), &[1.0]);
        for seed in 0..50 {
            let p = random_probability_vector(7, seed);
            assert!((p.sum() - 1.0).abs() < 1e-14);
            assert!(p.values().iter().all(|&v| v >= 0.0));
            assert!(p.values().windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(p, random_probability_vector(7, seed));
        }
    }

    #[test]
    fn random_density_sweep() {
        let dims = SystemDims::new(vec![2, 3]).unwrap();
        for seed in 0..100 {
            let rho = random_density(&dims, seed);
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert!(rho.eigenvalues().unwrap().last().unwrap() > &-1e-12);
        }
        let scalar = random_density(&SystemDims::single(1).unwrap(), 0);
        assert!((scalar.as_matrix()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn random_density_spectrum_round_trip() {
        let dims = SystemDims::new(vec![2, 2]).unwrap();
        for seed in 0..10 {
            let rho = random_density(&dims, seed);
            let p = random_probability_vector(4, seed);
            for (x, y) in rho.eigenvalues().unwrap().iter().zip(p.values()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
