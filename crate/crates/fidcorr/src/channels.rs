//! Quantum channels: uniform charge dephasing, the angle-parameterized
//! per-site variant, and seeded random Kraus channels for property testing.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, HermitianMatrix};
use crate::sampling;
use crate::states::{ChargeOperatorSet, DensityMatrix};

/// Per-site rotation angles, each in [0, pi/2]. theta_j = 0 acts as the
/// identity at site j; theta_j = pi/2 conjugates by the full charge operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVector {
    components: Vec<f64>,
}

impl PerturbationVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        for &t in &components {
            if !(0.0..=FRAC_PI_2 + 1e-12).contains(&t) {
                return Err(Error::OutOfRange {
                    name: "theta",
                    value: t,
                    low: 0.0,
                    high: FRAC_PI_2,
                });
            }
        }
        Ok(Self { components })
    }

    pub fn uniform(len: usize, t: f64) -> Result<Self> {
        Self::new(vec![t; len])
    }

    /// All zeros except `t` at `site`.
    pub fn single_site(len: usize, site: usize, t: f64) -> Result<Self> {
        if site >= len {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: len,
            });
        }
        let mut v = vec![0.0; len];
        v[site] = t;
        Self::new(v)
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// |theta|^2 = sum theta_i^2.
    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|t| t * t).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.components.iter().map(|t| t * c).collect())
    }
}

#[derive(Clone, Debug)]
pub enum ChannelKind {
    /// E_j[rho] = (1-p) rho + p O_j rho O_j†, composed over all sites.
    Uniform(f64),
    /// E_j[rho] = cos^2(theta_j) rho + sin^2(theta_j) O_j rho O_j†.
    Parameterized(PerturbationVector),
}

/// A charge-dephasing channel bound to an operator set.
#[derive(Clone, Debug)]
pub struct ChannelSpec<'a> {
    pub ops: &'a ChargeOperatorSet,
    pub kind: ChannelKind,
}

impl ChannelSpec<'_> {
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match &self.kind {
            ChannelKind::Uniform(p) => apply_uniform(rho, self.ops, *p),
            ChannelKind::Parameterized(theta) => apply_parameterized(rho, self.ops, theta),
        }
    }
}

/// Composition over sites in ascending index order of
/// E_j[rho] = (1-p) rho + p O_j rho O_j†.
pub fn apply_uniform(rho: &DensityMatrix, ops: &ChargeOperatorSet, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            low: 0.0,
            high: 1.0,
        });
    }
    let raw = apply_uniform_raw(rho.matrix(), ops, p)?;
    DensityMatrix::new(rho.system().clone(), raw)
}

pub(crate) fn apply_uniform_raw(
    m: &CMatrix,
    ops: &ChargeOperatorSet,
    p: f64,
) -> Result<CMatrix> {
    let mut raw = m.clone();
    for j in 0..ops.n_sites() {
        let mut acc = raw.scaled(1.0 - p);
        acc.add_scaled(p, &ops.conjugate(j, &raw)?);
        raw = acc;
    }
    Ok(raw)
}

/// Composition over sites of E_j[rho] = cos^2(theta_j) rho
/// + sin^2(theta_j) O_j rho O_j†. Sites with theta_j = 0 are skipped.
pub fn apply_parameterized(
    rho: &DensityMatrix,
    ops: &ChargeOperatorSet,
    theta: &PerturbationVector,
) -> Result<DensityMatrix> {
    let raw = apply_parameterized_raw(rho.matrix(), ops, theta)?;
    DensityMatrix::new(rho.system().clone(), raw)
}

pub(crate) fn apply_parameterized_raw(
    m: &CMatrix,
    ops: &ChargeOperatorSet,
    theta: &PerturbationVector,
) -> Result<CMatrix> {
    if theta.len() != ops.n_sites() {
        return Err(Error::DimensionMismatch {
            left: theta.len(),
            right: ops.n_sites(),
        });
    }
    let mut raw = m.clone();
    for (j, &t) in theta.components().iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        let (s, c) = t.sin_cos();
        let mut acc = raw.scaled(c * c);
        acc.add_scaled(s * s, &ops.conjugate(j, &raw)?);
        raw = acc;
    }
    Ok(raw)
}

/// Completely positive trace-preserving map given by an explicit Kraus set.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates completeness: |sum K†K - I| <= 1e-10.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidArgument("empty Kraus set".into()));
        }
        let ch = Self { operators };
        let defect = ch.completeness_defect();
        if defect > 1e-10 {
            return Err(Error::NotUnitary { defect });
        }
        Ok(ch)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// Max entry of |sum K†K - I|.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let mut acc = CMatrix::zeros(dim);
        for k in &self.operators {
            acc = acc.add(&k.adjoint().mul(k));
        }
        acc.max_abs_diff(&CMatrix::identity(dim))
    }

    pub fn apply_raw(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.dim());
        for k in &self.operators {
            out = out.add(&k.mul(m).mul(&k.adjoint()));
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(rho.system().clone(), self.apply_raw(rho.matrix()))
    }

    /// Apply to an unnormalized Hermitian matrix.
    pub fn apply_hermitian(&self, m: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.apply_raw(m.matrix()))
    }
}

/// Seeded random channel: a Gaussian (n_kraus*dim) x dim block is
/// orthonormalized into one isometry whose dim x dim slices become the Kraus
/// operators, so completeness holds exactly up to round-off. n_kraus = 1
/// yields a Haar-like random unitary.
pub fn random_channel(dim: usize, n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    if n_kraus < 1 {
        return Err(Error::InvalidArgument("n_kraus must be >= 1".into()));
    }
    if dim < 1 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    let mut rng = sampling::rng(seed);
    let rows = dim * n_kraus;
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..rows).map(|_| sampling::complex_gaussian(&mut rng)).collect())
        .collect();
    if !sampling::orthonormalize_columns(&mut cols) {
        return Err(Error::InvalidArgument(
            "degenerate random isometry".into(),
        ));
    }
    let operators = (0..n_kraus)
        .map(|k| CMatrix::from_fn(dim, |i, j| cols[j][k * dim + i]))
        .collect();
    KrausChannel::new(operators)
}
