//! Uhlmann fidelity, square-root fidelity, and the Bures distance.
//!
//! The primary numerical route is the product spectrum of the Hermitian
//! sandwich sqrt(rho) sigma sqrt(rho): F = (sum_i sqrt(lambda_i))^2. The
//! unnormalized variants accept PSD matrices of any trace; that contract is
//! exercised by charge-block mixtures whose blocks carry fractional weight.

use crate::error::{Error, Result};
use crate::matcore::{
    self, CMatrix, HermitianMatrix, EIGENVALUE_CLIP_TOL,
};
use crate::states::DensityMatrix;

fn sum_sqrt(lams: &[f64]) -> f64 {
    lams.iter().map(|&l| l.sqrt()).sum()
}

/// Uhlmann fidelity of two density matrices, clipped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = fidelity_unnormalized(rho.hermitian(), sigma.hermitian())?;
    Ok(f.min(1.0))
}

/// sqrt(F); additive over orthogonal charge blocks.
pub fn sqrt_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(fidelity(rho, sigma)?.sqrt())
}

/// Squared Bures distance 2 - 2 sqrt(F), in [0, 2].
pub fn bures_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok((2.0 - 2.0 * sqrt_fidelity(rho, sigma)?).clamp(0.0, 2.0))
}

/// Fidelity of an unnormalized PSD pair, clipped to [0, tr(a) tr(b)].
pub fn fidelity_unnormalized(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let lams = matcore::product_spectrum(a, b)?;
    let f = sum_sqrt(&lams).powi(2);
    Ok(f.clamp(0.0, (a.trace_re() * b.trace_re()).max(0.0)))
}

pub fn sqrt_fidelity_unnormalized(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    Ok(fidelity_unnormalized(a, b)?.sqrt())
}

/// PSD square root of a state, for reuse across many fidelity evaluations
/// against the same rho.
pub fn state_sqrt(rho: &DensityMatrix) -> Result<HermitianMatrix> {
    matcore::psd_sqrt(rho.hermitian(), EIGENVALUE_CLIP_TOL)
}

/// Fidelity against sigma given a precomputed sqrt(rho).
pub fn fidelity_with_sqrt(sqrt_rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    let lams = matcore::product_spectrum_with_sqrt(sqrt_rho, sigma)?;
    Ok(sum_sqrt(&lams).powi(2).max(0.0))
}

/// Fidelity of a valid state against a raw (unvalidated but unit-trace,
/// Hermitian-by-construction) matrix; used on internal mixtures of unitary
/// conjugates where full revalidation would be wasteful.
pub fn fidelity_against_raw(sqrt_rho: &HermitianMatrix, raw: &CMatrix) -> Result<f64> {
    fidelity_with_sqrt(sqrt_rho, &HermitianMatrix::symmetrized(raw.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::states::{build_fixed_point, FixedPointKind, SystemSpec};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn state_from(dim: usize, m: CMatrix) -> DensityMatrix {
        DensityMatrix::new(SystemSpec::single_site(dim).unwrap(), m).unwrap()
    }

    fn random_state(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
        let mut rng = sampling::rng(seed);
        state_from(
            dim,
            sampling::random_density_hermitian(dim, rank, &mut rng)
                .matrix()
                .clone(),
        )
    }

    #[test]
    fn self_fidelity_is_one() {
        for (dim, rank, seed) in [(2, 1, 1u64), (4, 4, 2), (8, 3, 3)] {
            let rho = random_state(dim, rank, seed);
            let f = fidelity(&rho, &rho).unwrap();
            assert!((f - 1.0).abs() < 1e-10, "dim {dim}: {f}");
        }
    }

    #[test]
    fn pure_against_maximally_mixed() {
        let zero = state_from(2, CMatrix::outer(&[c(1.0, 0.0), c(0.0, 0.0)]));
        let mixed = state_from(2, CMatrix::identity(2).scaled(0.5));
        let f = fidelity(&zero, &mixed).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        // D_b^2 = 2 - 2 sqrt(1/2)
        let d = bures_distance_sq(&zero, &mixed).unwrap();
        assert!((d - (2.0 - 2.0 * 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn commuting_diagonal_case() {
        let mut a = CMatrix::zeros(2);
        a[(0, 0)] = c(0.75, 0.0);
        a[(1, 1)] = c(0.25, 0.0);
        let mut b = CMatrix::zeros(2);
        b[(0, 0)] = c(0.25, 0.0);
        b[(1, 1)] = c(0.75, 0.0);
        let f = fidelity(&state_from(2, a), &state_from(2, b)).unwrap();
        assert!((f - 0.75).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pure_states() {
        let zero = state_from(2, CMatrix::outer(&[c(1.0, 0.0), c(0.0, 0.0)]));
        let one = state_from(2, CMatrix::outer(&[c(0.0, 0.0), c(1.0, 0.0)]));
        assert!(sqrt_fidelity(&zero, &one).unwrap() < 1e-12);
        assert!((bures_distance_sq(&zero, &one).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identical_states_have_zero_distance() {
        let rho = random_state(4, 2, 5);
        assert!(bures_distance_sq(&rho, &rho).unwrap() < 1e-10);
    }

    #[test]
    fn symmetric_in_arguments() {
        let rho = random_state(6, 6, 7);
        let sigma = random_state(6, 2, 8);
        let a = fidelity(&rho, &sigma).unwrap();
        let b = fidelity(&sigma, &rho).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn block_additivity_of_sqrt_fidelity() {
        // (lam1 rho1 + lam2 rho2) vs (mu1 sigma1 + mu2 sigma2) on orthogonal
        // blocks of dims 2 and 3.
        let mut rng = sampling::rng(13);
        let rho1 = sampling::random_density_hermitian(2, 2, &mut rng);
        let sig1 = sampling::random_density_hermitian(2, 1, &mut rng);
        let rho2 = sampling::random_density_hermitian(3, 2, &mut rng);
        let sig2 = sampling::random_density_hermitian(3, 3, &mut rng);
        let (l1, l2) = (0.3, 0.7);
        let (m1, m2) = (0.6, 0.4);
        let mut a = CMatrix::zeros(5);
        let mut b = CMatrix::zeros(5);
        for i in 0..2 {
            for j in 0..2 {
                a[(i, j)] = rho1.matrix()[(i, j)] * l1;
                b[(i, j)] = sig1.matrix()[(i, j)] * m1;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                a[(i + 2, j + 2)] = rho2.matrix()[(i, j)] * l2;
                b[(i + 2, j + 2)] = sig2.matrix()[(i, j)] * m2;
            }
        }
        let whole = sqrt_fidelity(&state_from(5, a), &state_from(5, b)).unwrap();
        let part1 = sqrt_fidelity_unnormalized(&rho1, &sig1).unwrap();
        let part2 = sqrt_fidelity_unnormalized(&rho2, &sig2).unwrap();
        let expected = (l1 * m1).sqrt() * part1 + (l2 * m2).sqrt() * part2;
        assert!((whole - expected).abs() < 1e-10);
    }

    #[test]
    fn sandwich_route_matches_direct_sqrt_route() {
        // Independent route: tr sqrt(sqrt(rho) sigma sqrt(rho)) via psd_sqrt
        // of the sandwich itself, instead of its eigenvalues.
        let rho = random_state(8, 8, 20);
        let sigma = random_state(8, 4, 21);
        let f = fidelity(&rho, &sigma).unwrap();

        let sqrt_rho = state_sqrt(&rho).unwrap();
        let sandwich = HermitianMatrix::symmetrized(
            sqrt_rho
                .matrix()
                .mul(sigma.matrix())
                .mul(sqrt_rho.matrix()),
        );
        let root = matcore::psd_sqrt(&sandwich, 1e-10).unwrap();
        let f_direct = root.trace_re().powi(2);
        assert!((f - f_direct).abs() < 1e-10);
    }

    #[test]
    fn fixed_point_cross_fidelities() {
        let spec = SystemSpec::chain(3, 2).unwrap();
        let (src, _) = build_fixed_point(&spec, FixedPointKind::Src).unwrap();
        let (swssb, _) = build_fixed_point(&spec, FixedPointKind::Swssb).unwrap();
        // |<+++| P_+ |+++>| = <+++|P|+++> = 1/4 (P has 4 of 8 shift-sector
        // states, one of which is |+++>): F(pure, mixed) = <psi|sigma|psi>.
        let f = fidelity(&src, &swssb).unwrap();
        assert!((f - 0.25).abs() < 1e-10);
    }
}
