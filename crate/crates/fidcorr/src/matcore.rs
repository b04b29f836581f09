//! Dense complex Hermitian linear-algebra kernel.
//!
//! Everything downstream (fidelity, correlators, metric probes, proxy bounds)
//! reduces to eigendecompositions, PSD square roots, and spectra of products
//! of PSD matrices. This module owns those primitives and the spectrum-hygiene
//! policy: eigenvalues of nominally PSD matrices may come out slightly
//! negative from round-off; tiny negatives are clipped, genuine negatives are
//! hard errors.

use faer::{MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum tolerated |M - M†| entry for a matrix declared Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues of PSD matrices above -EIGENVALUE_CLIP_TOL are clipped to 0;
/// anything below is a hard error.
pub const EIGENVALUE_CLIP_TOL: f64 = 1e-10;
/// Floor for product spectra (eigenvalues of rho*sigma).
pub const PRODUCT_SPECTRUM_FLOOR: f64 = 1e-12;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::BadShape {
                dim,
                len: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Outer product |v><v|.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    fn as_faer(&self) -> MatRef<'_, Complex64> {
        MatRef::from_row_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let prod = self.as_faer() * other.as_faer();
        CMatrix::from_fn(self.dim, |i, j| prod[(i, j)])
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (o, x) in out.data.iter_mut().zip(other.data.iter()) {
            *o += x;
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (o, x) in out.data.iter_mut().zip(other.data.iter()) {
            *o -= x;
        }
        out
    }

    pub fn scaled(&self, c: f64) -> CMatrix {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= c;
        }
        out
    }

    /// self += c * other, in place.
    pub fn add_scaled(&mut self, c: f64, other: &CMatrix) {
        assert_eq!(self.dim, other.dim);
        for (o, x) in self.data.iter_mut().zip(other.data.iter()) {
            *o += c * x;
        }
    }

    pub fn scale_in_place(&mut self, c: f64) {
        for x in self.data.iter_mut() {
            *x *= c;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// tr(self * other) by direct contraction, no matmul.
    pub fn trace_product(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..self.dim {
            for b in 0..self.dim {
                acc += self[(a, b)] * other[(b, a)];
            }
        }
        acc
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (da, db) = (self.dim, other.dim);
        CMatrix::from_fn(da * db, |i, j| {
            self[(i / db, j / db)] * other[(i % db, j % db)]
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entry of |M - M†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                defect = defect.max(d);
            }
        }
        defect
    }

    /// Max entry of |M†M - I|.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .max_abs_diff(&CMatrix::identity(self.dim))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Hermitian matrix with its construction-time symmetrization defect.
///
/// Construction replaces M by (M + M†)/2 and records max |M - M†|; the
/// checked constructor rejects inputs whose defect exceeds [`HERMITICITY_TOL`].
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    matrix: CMatrix,
    hermiticity_defect: f64,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = Self::symmetrized(m);
        if h.hermiticity_defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                defect: h.hermiticity_defect,
                tol: HERMITICITY_TOL,
            });
        }
        Ok(h)
    }

    /// Unconditional symmetrization, for matrices that are Hermitian by
    /// construction up to round-off (products like sqrt(rho) sigma sqrt(rho)).
    pub fn symmetrized(mut m: CMatrix) -> Self {
        let defect = m.hermiticity_defect();
        let dim = m.dim();
        for i in 0..dim {
            for j in i..dim {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
            let d = m[(i, i)];
            m[(i, i)] = Complex64::new(d.re, 0.0);
        }
        Self {
            matrix: m,
            hermiticity_defect: defect,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }

    pub fn trace_re(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// the unitary matrix of eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    clip_tolerance: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn clip_tolerance(&self) -> f64 {
        self.clip_tolerance
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// V diag(f(lambda)) V†.
    pub fn reconstruct_mapped(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let dim = self.eigenvectors.dim();
        let v = &self.eigenvectors;
        // scaled = V diag(f(lambda))
        let mut scaled = CMatrix::zeros(dim);
        for j in 0..dim {
            let fj = f(self.eigenvalues[j]);
            for i in 0..dim {
                scaled[(i, j)] = v[(i, j)] * fj;
            }
        }
        scaled.mul(&v.adjoint())
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_mapped(|x| x)
    }

    /// Max entry of |V†V - I|.
    pub fn orthonormality_defect(&self) -> f64 {
        self.eigenvectors.unitarity_defect()
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(m: &HermitianMatrix) -> Result<Spectrum> {
    let dim = m.dim();
    let evd = m
        .matrix()
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenSolverFailed { dim })?;
    let u = evd.U();
    let s = evd.S();
    let eigenvalues: Vec<f64> = s.column_vector().iter().map(|z| z.re).collect();
    let eigenvectors = CMatrix::from_fn(dim, |i, j| u[(i, j)]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        clip_tolerance: EIGENVALUE_CLIP_TOL,
    })
}

/// Ascending eigenvalues only (no eigenvectors); cheaper than [`eigh`].
pub fn eigh_values(m: &HermitianMatrix) -> Result<Vec<f64>> {
    let dim = m.dim();
    m.matrix()
        .as_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenSolverFailed { dim })
}

/// Eigenvalues of a general (non-Hermitian) matrix. Retained as the
/// similarity-route cross-check for [`product_spectrum`].
pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    m.as_faer()
        .eigenvalues()
        .map_err(|_| Error::EigenSolverFailed { dim: m.dim() })
}

/// PSD principal square root: V diag(sqrt(max(lambda, 0))) V†.
///
/// Eigenvalues below -tol are rejected; anything in [-tol, 0) is clipped.
pub fn psd_sqrt(m: &HermitianMatrix, tol: f64) -> Result<HermitianMatrix> {
    let spec = eigh(m)?;
    let min = spec.min_eigenvalue();
    if min < -tol {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: min,
            tol,
        });
    }
    let root = spec.reconstruct_mapped(|x| if x > 0.0 { x.sqrt() } else { 0.0 });
    Ok(HermitianMatrix::symmetrized(root))
}

/// Eigenvalues of rho*sigma, descending and clipped at the PSD floor.
///
/// Computed through the Hermitian sandwich sqrt(rho) sigma sqrt(rho), which is
/// similar to rho*sigma but better conditioned for a selfadjoint solver.
pub fn product_spectrum(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<Vec<f64>> {
    let sqrt_rho = psd_sqrt(rho, EIGENVALUE_CLIP_TOL)?;
    product_spectrum_with_sqrt(&sqrt_rho, sigma)
}

/// Same as [`product_spectrum`] but reusing a precomputed sqrt(rho).
pub fn product_spectrum_with_sqrt(
    sqrt_rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
) -> Result<Vec<f64>> {
    if sqrt_rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: sqrt_rho.dim(),
            right: sigma.dim(),
        });
    }
    let sandwich = sqrt_rho
        .matrix()
        .mul(sigma.matrix())
        .mul(sqrt_rho.matrix());
    let sandwich = HermitianMatrix::symmetrized(sandwich);
    let mut lams = eigh_values(&sandwich)?;
    let min = lams.first().copied().unwrap_or(0.0);
    if min < -PRODUCT_SPECTRUM_FLOOR {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: min,
            tol: PRODUCT_SPECTRUM_FLOOR,
        });
    }
    for l in lams.iter_mut() {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    lams.reverse();
    Ok(lams)
}

/// Sum of lambda_i^k over a non-negative spectrum.
pub fn trace_power(lams: &[f64], k: u32) -> f64 {
    lams.iter().map(|&l| l.powi(k as i32)).sum()
}

/// tr(sqrt(M)) for PSD M; negative round-off eigenvalues contribute 0.
pub fn trace_sqrt(m: &HermitianMatrix, tol: f64) -> Result<f64> {
    let lams = eigh_values(m)?;
    let min = lams.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: min,
            tol,
        });
    }
    Ok(lams.iter().map(|&l| if l > 0.0 { l.sqrt() } else { 0.0 }).sum())
}
