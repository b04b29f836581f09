//! Seeded random generators for states, operators, and channels.
//!
//! All randomness in the crate flows through a ChaCha stream cipher so that a
//! u64 seed fully determines every test input and sweep.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::matcore::{CMatrix, HermitianMatrix};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn complex_gaussian(rng: &mut ChaCha12Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn random_matrix(dim: usize, rng: &mut ChaCha12Rng) -> CMatrix {
    CMatrix::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// (G + G†)/2 for Gaussian G.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha12Rng) -> HermitianMatrix {
    let g = random_matrix(dim, rng);
    HermitianMatrix::symmetrized(g.add(&g.adjoint()).scaled(0.5))
}

/// Gram matrix of `rank` Gaussian columns, scaled to O(1) entries.
pub fn random_psd(dim: usize, rank: usize, rng: &mut ChaCha12Rng) -> HermitianMatrix {
    let cols: Vec<Vec<Complex64>> = (0..rank)
        .map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect())
        .collect();
    let mut m = CMatrix::zeros(dim);
    for col in &cols {
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    HermitianMatrix::symmetrized(m.scaled(1.0 / (dim * rank.max(1)) as f64))
}

/// Random rank-`rank` density matrix as a Hermitian unit-trace PSD matrix.
pub fn random_density_hermitian(
    dim: usize,
    rank: usize,
    rng: &mut ChaCha12Rng,
) -> HermitianMatrix {
    let psd = random_psd(dim, rank, rng);
    let tr = psd.trace_re();
    HermitianMatrix::symmetrized(psd.matrix().scaled(1.0 / tr))
}

/// Normalized Gaussian vector.
pub fn random_pure(dim: usize, rng: &mut ChaCha12Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
/// Returns false if a column degenerates (practically impossible for
/// Gaussian input).
pub fn orthonormalize_columns(cols: &mut [Vec<Complex64>]) -> bool {
    for pass in 0..2 {
        for j in 0..cols.len() {
            for k in 0..j {
                let proj: Complex64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let (head, tail) = cols.split_at_mut(j);
                for (a, b) in head[k].iter().zip(tail[0].iter_mut()) {
                    *b -= proj * a;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 && pass == 0 {
                return false;
            }
            for z in cols[j].iter_mut() {
                *z /= norm;
            }
        }
    }
    true
}

/// Haar-like random unitary from Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut ChaCha12Rng) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect())
        .collect();
    assert!(orthonormalize_columns(&mut cols));
    CMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Vector of strictly positive components, uniform in (lo, hi).
pub fn random_positive_vector(len: usize, lo: f64, hi: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng(3);
        let u = random_unitary(6, &mut r);
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn density_has_unit_trace() {
        let mut r = rng(4);
        let d = random_density_hermitian(5, 3, &mut r);
        assert!((d.trace_re() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = random_matrix(4, &mut rng(99));
        let b = random_matrix(4, &mut rng(99));
        assert_eq!(a, b);
    }
}
