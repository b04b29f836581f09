//! Model density matrices and symmetry data for Z_n clock/shift chains.
//!
//! The canonical realization is a 1D chain of n-level sites with the global
//! symmetry U = product of per-site shift operators and per-site charged
//! operators O_i = clock at site i. Builders produce the three fixed points
//! (symmetric short-range correlated product state, symmetric-sector
//! projector, cat state) plus a strong-symmetry-preserving bond-dephased
//! family interpolating between the first two.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matcore::{eigh, CMatrix, HermitianMatrix, EIGENVALUE_CLIP_TOL};
use crate::sampling;

/// Max-norm tolerance for the strong/weak symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Tolerance on |trace - 1| for density-matrix validation.
pub const TRACE_TOL: f64 = 1e-10;
/// Unitarity tolerance for charged operators.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Lattice geometry and Hilbert-space bookkeeping for a chain of N sites with
/// local dimension n. The Hilbert dimension n^N is capped at construction.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    n_sites: usize,
    local_dim: usize,
    spatial_dim: usize,
    lattice_constant: f64,
    boundary: Boundary,
    dim_cap: usize,
}

pub const DEFAULT_DIM_CAP: usize = 4096;

impl SystemSpec {
    /// Open 1D chain with default lattice constant and cap.
    pub fn chain(n_sites: usize, local_dim: usize) -> Result<Self> {
        Self::new(
            n_sites,
            local_dim,
            1,
            1.0,
            Boundary::Open,
            DEFAULT_DIM_CAP,
        )
    }

    pub fn new(
        n_sites: usize,
        local_dim: usize,
        spatial_dim: usize,
        lattice_constant: f64,
        boundary: Boundary,
        dim_cap: usize,
    ) -> Result<Self> {
        if n_sites < 1 {
            return Err(Error::InvalidArgument("n_sites must be >= 1".into()));
        }
        if local_dim < 2 {
            return Err(Error::InvalidArgument("local_dim must be >= 2".into()));
        }
        if spatial_dim < 1 {
            return Err(Error::InvalidArgument("spatial_dim must be >= 1".into()));
        }
        if !(lattice_constant > 0.0) {
            return Err(Error::InvalidArgument(
                "lattice_constant must be positive".into(),
            ));
        }
        let mut dim: usize = 1;
        for _ in 0..n_sites {
            dim = dim
                .checked_mul(local_dim)
                .ok_or(Error::DimensionCapExceeded {
                    dim: usize::MAX,
                    cap: dim_cap,
                })?;
            if dim > dim_cap {
                return Err(Error::DimensionCapExceeded { dim, cap: dim_cap });
            }
        }
        Ok(Self {
            n_sites,
            local_dim,
            spatial_dim,
            lattice_constant,
            boundary,
            dim_cap,
        })
    }

    /// Single site of arbitrary local dimension; wraps loose matrices
    /// (random test states, imported containers) in a valid system.
    pub fn single_site(dim: usize) -> Result<Self> {
        Self::new(1, dim, 1, 1.0, Boundary::Open, DEFAULT_DIM_CAP.max(dim))
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn lattice_constant(&self) -> f64 {
        self.lattice_constant
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    pub fn hilbert_dim(&self) -> usize {
        self.local_dim.pow(self.n_sites as u32)
    }

    /// Stride of the digit at `site` in the row-major basis ordering
    /// (site 0 is most significant).
    fn site_stride(&self, site: usize) -> usize {
        self.local_dim.pow((self.n_sites - 1 - site) as u32)
    }

    fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.site_stride(site)) % self.local_dim
    }

    /// Basis index with every site digit shifted by +m mod n.
    fn shift_all(&self, index: usize, m: usize) -> usize {
        let n = self.local_dim;
        let mut out = 0;
        for site in 0..self.n_sites {
            let d = (self.digit(index, site) + m) % n;
            out += d * self.site_stride(site);
        }
        out
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            });
        }
        Ok(())
    }

    /// Nearest-neighbor bonds in ascending order; the periodic wrap bond
    /// (N-1, 0) comes last.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<(usize, usize)> =
            (0..self.n_sites.saturating_sub(1)).map(|j| (j, j + 1)).collect();
        if self.boundary == Boundary::Periodic && self.n_sites > 2 {
            bonds.push((self.n_sites - 1, 0));
        }
        bonds
    }
}

/// Validated density matrix: Hermitian, PSD up to the clip tolerance, unit
/// trace. Construction records the input's trace defect and minimum
/// eigenvalue, clips round-off negatives, and renormalizes.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    system: SystemSpec,
    matrix: HermitianMatrix,
    trace_defect: f64,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn new(system: SystemSpec, m: CMatrix) -> Result<Self> {
        let dim = system.hilbert_dim();
        if m.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: m.dim(),
                right: dim,
            });
        }
        let herm = HermitianMatrix::new(m)?;
        let spec = eigh(&herm)?;
        let min_eigenvalue = spec.min_eigenvalue();
        if min_eigenvalue < -EIGENVALUE_CLIP_TOL {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: min_eigenvalue,
                tol: EIGENVALUE_CLIP_TOL,
            });
        }
        let clipped_trace: f64 = spec.eigenvalues().iter().filter(|&&l| l > 0.0).sum();
        let trace_defect = (herm.trace_re() - 1.0).abs();
        if trace_defect > TRACE_TOL {
            return Err(Error::NotUnitTrace {
                defect: trace_defect,
                tol: TRACE_TOL,
            });
        }
        // Clip round-off negatives and renormalize the clipped spectrum.
        let rebuilt = spec.reconstruct_mapped(|l| if l > 0.0 { l / clipped_trace } else { 0.0 });
        Ok(Self {
            system,
            matrix: HermitianMatrix::symmetrized(rebuilt),
            trace_defect,
            min_eigenvalue,
        })
    }

    /// rho = |psi><psi| from amplitudes; PSD and pure by construction, so no
    /// eigendecomposition is needed.
    pub fn from_pure(system: SystemSpec, amplitudes: &[Complex64]) -> Result<Self> {
        let dim = system.hilbert_dim();
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: dim,
            });
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let trace_defect = (norm_sq - 1.0).abs();
        if trace_defect > 1e-6 {
            return Err(Error::NotUnitTrace {
                defect: trace_defect,
                tol: 1e-6,
            });
        }
        let norm = norm_sq.sqrt();
        let normalized: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
        Ok(Self {
            system,
            matrix: HermitianMatrix::symmetrized(CMatrix::outer(&normalized)),
            trace_defect,
            min_eigenvalue: 0.0,
        })
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace_defect(&self) -> f64 {
        self.trace_defect
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// tr(rho^2).
    pub fn purity(&self) -> f64 {
        self.matrix().trace_product(self.matrix()).re
    }
}

/// Per-site charged unitaries plus the global symmetry unitary for a Z_n
/// chain. Site operators are stored as local n x n blocks and embedded on
/// demand; conjugations exploit locality.
#[derive(Clone, Debug)]
pub struct ChargeOperatorSet {
    system: SystemSpec,
    site_locals: Vec<CMatrix>,
    symmetry: CMatrix,
    eta: u32,
}

impl ChargeOperatorSet {
    /// Canonical realization: O_i = clock (diag of n-th roots of unity),
    /// U = tensor product of shifts.
    pub fn clock_shift(system: &SystemSpec) -> Result<Self> {
        let n = system.local_dim();
        let clock = clock_local(n);
        let locals = vec![clock; system.n_sites()];
        let symmetry = shift_product(system);
        Self::from_parts(system.clone(), locals, symmetry)
    }

    /// Validates unitarity of every site operator, the charged-operator
    /// commutation relation with U, and fixes eta from self-adjointness.
    pub fn from_parts(
        system: SystemSpec,
        site_locals: Vec<CMatrix>,
        symmetry: CMatrix,
    ) -> Result<Self> {
        if site_locals.len() != system.n_sites() {
            return Err(Error::DimensionMismatch {
                left: site_locals.len(),
                right: system.n_sites(),
            });
        }
        if symmetry.dim() != system.hilbert_dim() {
            return Err(Error::DimensionMismatch {
                left: symmetry.dim(),
                right: system.hilbert_dim(),
            });
        }
        for local in &site_locals {
            if local.dim() != system.local_dim() {
                return Err(Error::DimensionMismatch {
                    left: local.dim(),
                    right: system.local_dim(),
                });
            }
            let defect = local.unitarity_defect();
            if defect > UNITARITY_TOL {
                return Err(Error::NotUnitary { defect });
            }
        }
        let sym_defect = symmetry.unitarity_defect();
        if sym_defect > 1e-8 {
            return Err(Error::NotUnitary { defect: sym_defect });
        }
        let mut eta = 4;
        for local in &site_locals {
            if local.max_abs_diff(&local.adjoint()) >= 1e-10 {
                eta = 1;
                break;
            }
        }
        let set = Self {
            system,
            site_locals,
            symmetry,
            eta,
        };
        for site in 0..set.system.n_sites() {
            set.charge_phase(site)?;
        }
        Ok(set)
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn n_sites(&self) -> usize {
        self.system.n_sites()
    }

    pub fn eta(&self) -> u32 {
        self.eta
    }

    pub fn symmetry(&self) -> &CMatrix {
        &self.symmetry
    }

    pub fn site_local(&self, site: usize) -> &CMatrix {
        &self.site_locals[site]
    }

    /// Site operator embedded in the full Hilbert space.
    pub fn embedded_site_op(&self, site: usize) -> Result<CMatrix> {
        self.system.check_site(site)?;
        let dim = self.system.hilbert_dim();
        let n = self.system.local_dim();
        let stride = self.system.site_stride(site);
        let local = &self.site_locals[site];
        let mut out = CMatrix::zeros(dim);
        for a in 0..dim {
            let da = (a / stride) % n;
            let base = a - da * stride;
            for k in 0..n {
                out[(a, base + k * stride)] = local[(da, k)];
            }
        }
        Ok(out)
    }

    /// Commutation phase c with O_i U = c U O_i; verifies c is a primitive
    /// n-th root of unity within tolerance.
    pub fn charge_phase(&self, site: usize) -> Result<Complex64> {
        self.system.check_site(site)?;
        let n = self.system.local_dim();
        let ou = self.left_mul(site, &self.symmetry, false)?;
        let uo = self.right_mul(site, &self.symmetry, false)?;
        // Phase from the largest-magnitude entry of U O_i.
        let dim = uo.dim();
        let mut best = (0usize, 0usize);
        let mut best_mag = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                let mag = uo[(a, b)].norm();
                if mag > best_mag {
                    best_mag = mag;
                    best = (a, b);
                }
            }
        }
        if best_mag < 1e-12 {
            return Err(Error::NotCharged("U O_i vanishes".into()));
        }
        let c = ou[best] / uo[best];
        let c = c / c.norm();
        let defect = ou.max_abs_diff(&scaled_c(&uo, c));
        if defect > SYMMETRY_TOL {
            return Err(Error::NotCharged(format!(
                "site {site}: no scalar commutation phase (defect {defect:.3e})"
            )));
        }
        // Primitive n-th root: c^n = 1 and c^m != 1 for 0 < m < n.
        let mut p = Complex64::new(1.0, 0.0);
        for m in 1..=n {
            p *= c;
            let off = (p - Complex64::new(1.0, 0.0)).norm();
            if m < n && off < 1e-6 {
                return Err(Error::NotCharged(format!(
                    "site {site}: commutation phase has order {m} < {n}"
                )));
            }
            if m == n && off > 1e-8 {
                return Err(Error::NotCharged(format!(
                    "site {site}: commutation phase is not an n-th root of unity"
                )));
            }
        }
        Ok(c)
    }

    /// O_i^[pow] M or its dagger variant, exploiting single-site locality.
    pub fn left_mul(&self, site: usize, m: &CMatrix, dagger: bool) -> Result<CMatrix> {
        self.system.check_site(site)?;
        let local = self.effective_local(site, 1, dagger);
        Ok(apply_local_left(&local, site, &self.system, m))
    }

    /// M O_i or M O_i†.
    pub fn right_mul(&self, site: usize, m: &CMatrix, dagger: bool) -> Result<CMatrix> {
        self.system.check_site(site)?;
        let local = self.effective_local(site, 1, dagger);
        Ok(apply_local_right(&local, site, &self.system, m))
    }

    /// O_i^pow M (O_i^pow)† (dagger = false) or O_i†^pow M O_i^pow
    /// (dagger = true).
    pub fn conjugate_power(
        &self,
        site: usize,
        m: &CMatrix,
        pow: u32,
        dagger: bool,
    ) -> Result<CMatrix> {
        self.system.check_site(site)?;
        let local = self.effective_local(site, pow, dagger);
        let tmp = apply_local_left(&local, site, &self.system, m);
        Ok(apply_local_right(&local.adjoint(), site, &self.system, &tmp))
    }

    /// O_i M O_i†.
    pub fn conjugate(&self, site: usize, m: &CMatrix) -> Result<CMatrix> {
        self.conjugate_power(site, m, 1, false)
    }

    /// O_i† M O_i.
    pub fn conjugate_dagger(&self, site: usize, m: &CMatrix) -> Result<CMatrix> {
        self.conjugate_power(site, m, 1, true)
    }

    fn effective_local(&self, site: usize, pow: u32, dagger: bool) -> CMatrix {
        let base = if dagger {
            self.site_locals[site].adjoint()
        } else {
            self.site_locals[site].clone()
        };
        let mut acc = CMatrix::identity(base.dim());
        for _ in 0..pow {
            acc = acc.mul(&base);
        }
        acc
    }
}

fn scaled_c(m: &CMatrix, c: Complex64) -> CMatrix {
    CMatrix::from_fn(m.dim(), |i, j| m[(i, j)] * c)
}

/// Local clock: diag(1, w, w^2, ...), w = exp(2 pi i / n).
pub fn clock_local(n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Local shift: |k+1 mod n><k|.
pub fn shift_local(n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| {
        if i == (j + 1) % n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// U = tensor product of per-site shifts, as a dense permutation matrix.
pub fn shift_product(system: &SystemSpec) -> CMatrix {
    let dim = system.hilbert_dim();
    let mut u = CMatrix::zeros(dim);
    for b in 0..dim {
        u[(system.shift_all(b, 1), b)] = Complex64::new(1.0, 0.0);
    }
    u
}

/// Projector onto the U-eigenvalue-w^sector subspace:
/// P_s = (1/n) sum_m w^{-s m} U^m.
pub fn sector_projector(system: &SystemSpec, sector: usize) -> CMatrix {
    let dim = system.hilbert_dim();
    let n = system.local_dim();
    let mut p = CMatrix::zeros(dim);
    for b in 0..dim {
        for m in 0..n {
            let a = system.shift_all(b, m);
            let phase =
                Complex64::from_polar(1.0 / n as f64, -2.0 * PI * (sector * m) as f64 / n as f64);
            p[(a, b)] += phase;
        }
    }
    p
}

fn apply_local_left(local: &CMatrix, site: usize, sys: &SystemSpec, m: &CMatrix) -> CMatrix {
    let dim = sys.hilbert_dim();
    let n = sys.local_dim();
    let stride = sys.site_stride(site);
    let mut out = CMatrix::zeros(dim);
    for a in 0..dim {
        let da = (a / stride) % n;
        let base = a - da * stride;
        for k in 0..n {
            let coeff = local[(da, k)];
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            let src = base + k * stride;
            for b in 0..dim {
                out[(a, b)] += coeff * m[(src, b)];
            }
        }
    }
    out
}

fn apply_local_right(local: &CMatrix, site: usize, sys: &SystemSpec, m: &CMatrix) -> CMatrix {
    let dim = sys.hilbert_dim();
    let n = sys.local_dim();
    let stride = sys.site_stride(site);
    let mut out = CMatrix::zeros(dim);
    for b in 0..dim {
        let db = (b / stride) % n;
        let base = b - db * stride;
        for k in 0..n {
            let coeff = local[(k, db)];
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            let src = base + k * stride;
            for a in 0..dim {
                out[(a, b)] += m[(a, src)] * coeff;
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointKind {
    /// Symmetric short-range correlated product state |+>^N.
    Src,
    /// Normalized projector onto the charge-0 sector of U.
    Swssb,
    /// Pure cat state (1/sqrt n) sum_k |k...k>.
    Ghz,
}

/// Result of the strong/weak symmetry check. `phase` is present iff the
/// strong check passed.
#[derive(Clone, Copy, Debug)]
pub struct SymmetryCheck {
    pub strong: bool,
    pub phase: Option<Complex64>,
    pub weak: bool,
}

/// strong: U rho = e^{i theta} rho in max norm, with theta read off the
/// largest-magnitude entry of rho. weak: U rho U† = rho.
pub fn check_strong_symmetry(rho: &DensityMatrix, u: &CMatrix) -> Result<SymmetryCheck> {
    if u.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: rho.dim(),
        });
    }
    let m = rho.matrix();
    let urho = u.mul(m);
    let mut best = (0usize, 0usize);
    let mut best_mag = 0.0;
    for a in 0..m.dim() {
        for b in 0..m.dim() {
            let mag = m[(a, b)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = (a, b);
            }
        }
    }
    let raw = urho[best] / m[best];
    let phase = if raw.norm() > 0.0 {
        raw / raw.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let strong_defect = urho.max_abs_diff(&scaled_c(m, phase));
    let strong = strong_defect < SYMMETRY_TOL;
    let weak_defect = u.mul(m).mul(&u.adjoint()).max_abs_diff(m);
    let weak = weak_defect < SYMMETRY_TOL;
    Ok(SymmetryCheck {
        strong,
        phase: strong.then_some(phase),
        weak,
    })
}

/// Shortcut for the strong check against an operator set's symmetry;
/// errors if it fails.
pub fn require_strong_symmetry(rho: &DensityMatrix, ops: &ChargeOperatorSet) -> Result<()> {
    let check = check_strong_symmetry(rho, ops.symmetry())?;
    if !check.strong {
        let urho = ops.symmetry().mul(rho.matrix());
        // Recompute the defect for the diagnostic.
        let defect = urho.max_abs_diff(rho.matrix());
        return Err(Error::NotStronglySymmetric { defect });
    }
    Ok(())
}

/// Build one of the three fixed-point states together with its clock/shift
/// operator set. Every output passes the strong-symmetry check with phase 1.
pub fn build_fixed_point(
    spec: &SystemSpec,
    kind: FixedPointKind,
) -> Result<(DensityMatrix, ChargeOperatorSet)> {
    let ops = ChargeOperatorSet::clock_shift(spec)?;
    let dim = spec.hilbert_dim();
    let n = spec.local_dim();
    let rho = match kind {
        FixedPointKind::Src => {
            let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
            DensityMatrix::from_pure(spec.clone(), &vec![amp; dim])?
        }
        FixedPointKind::Ghz => {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            for k in 0..n {
                let mut index = 0;
                for site in 0..spec.n_sites() {
                    index += k * spec.site_stride(site);
                }
                amps[index] = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
            }
            DensityMatrix::from_pure(spec.clone(), &amps)?
        }
        FixedPointKind::Swssb => {
            let sector_dim = dim / n;
            let p = sector_projector(spec, 0).scaled(1.0 / sector_dim as f64);
            DensityMatrix::new(spec.clone(), p)?
        }
    };
    require_strong_symmetry(&rho, &ops)?;
    Ok((rho, ops))
}

/// Strongly symmetric interpolation from the SRC fixed point (q = 0) to the
/// SW-SSB fixed point (q = (n-1)/n) by dephasing every nearest-neighbor bond
/// with the charge-neutral bond operator O_j O_{j+1}†:
///
///   rho <- (1-q) rho + q/(n-1) * sum_{m=1}^{n-1} B^m rho B^{-m},
///   B = O_j O_{j+1}†.
pub fn build_bond_dephased(spec: &SystemSpec, q: f64) -> Result<DensityMatrix> {
    let n = spec.local_dim();
    let q_max = (n - 1) as f64 / n as f64;
    if !(0.0..=q_max + 1e-12).contains(&q) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            low: 0.0,
            high: q_max,
        });
    }
    let ops = ChargeOperatorSet::clock_shift(spec)?;
    let dim = spec.hilbert_dim();
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut raw = CMatrix::outer(&vec![amp; dim]);
    let mix = q / (n - 1) as f64;
    for (j, jn) in spec.bonds() {
        let mut acc = raw.scaled(1.0 - q);
        for m in 1..n as u32 {
            // B^m rho B^{-m} with B = O_j O_{j+1}†: conjugate by O_j^m at j
            // and by O_{j+1}†^m at the neighbor.
            let t = ops.conjugate_power(j, &raw, m, false)?;
            let t = ops.conjugate_power(jn, &t, m, true)?;
            acc.add_scaled(mix, &t);
        }
        raw = acc;
    }
    let rho = DensityMatrix::new(spec.clone(), raw)?;
    require_strong_symmetry(&rho, &ops)?;
    Ok(rho)
}

/// Random strongly symmetric state: a random mixture of `rank` Gaussian
/// vectors projected into one charge sector of U.
pub fn build_random_symmetric(
    spec: &SystemSpec,
    sector: usize,
    rank: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    if rank < 1 {
        return Err(Error::InvalidArgument("rank must be >= 1".into()));
    }
    let n = spec.local_dim();
    let p = sector_projector(spec, sector % n);
    let dim = spec.hilbert_dim();
    let mut rng = sampling::rng(seed);
    let mut acc = CMatrix::zeros(dim);
    let mut built = 0;
    while built < rank {
        let g = sampling::random_pure(dim, &mut rng);
        // v = P g
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for a in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..dim {
                s += p[(a, b)] * g[b];
            }
            v[a] = s;
        }
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq < 1e-12 {
            continue;
        }
        let weight: f64 = rng.random_range(0.2..1.0);
        let outer = CMatrix::outer(&v);
        acc.add_scaled(weight / norm_sq, &outer);
        built += 1;
    }
    let tr = acc.trace().re;
    acc.scale_in_place(1.0 / tr);
    DensityMatrix::new(spec.clone(), acc)
}

/// Plain-text state container: a dimension header line followed by row-major
/// complex entries as alternating real/imaginary decimal pairs, one row per
/// line. Lines starting with '#' are comments.
pub mod container {
    use super::*;
    use std::fmt::Write as _;

    pub fn write_state(m: &CMatrix) -> String {
        let dim = m.dim();
        let mut out = String::new();
        let _ = writeln!(out, "# fidcorr state container");
        let _ = writeln!(out, "{dim}");
        for i in 0..dim {
            let mut line = String::new();
            for j in 0..dim {
                if j > 0 {
                    line.push(' ');
                }
                let z = m[(i, j)];
                let _ = write!(line, "{:.17e} {:.17e}", z.re, z.im);
            }
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn read_state(text: &str) -> Result<CMatrix> {
        let mut tokens = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(|l| l.split_whitespace());
        let dim: usize = tokens
            .next()
            .ok_or_else(|| Error::BadContainer("missing dimension header".into()))?
            .parse()
            .map_err(|e| Error::BadContainer(format!("bad dimension header: {e}")))?;
        if dim == 0 {
            return Err(Error::BadContainer("dimension must be positive".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for idx in 0..dim * dim {
            let re: f64 = tokens
                .next()
                .ok_or_else(|| Error::BadContainer(format!("truncated at entry {idx}")))?
                .parse()
                .map_err(|e| Error::BadContainer(format!("entry {idx}: {e}")))?;
            let im: f64 = tokens
                .next()
                .ok_or_else(|| Error::BadContainer(format!("truncated at entry {idx}")))?
                .parse()
                .map_err(|e| Error::BadContainer(format!("entry {idx}: {e}")))?;
            data.push(Complex64::new(re, im));
        }
        if tokens.next().is_some() {
            return Err(Error::BadContainer("trailing data".into()));
        }
        CMatrix::from_vec(dim, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_fn(2, |i, j| {
            if i != j {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    #[test]
    fn dimension_cap_enforced() {
        assert!(SystemSpec::chain(13, 2).is_err());
        assert!(SystemSpec::chain(12, 2).is_ok());
    }

    #[test]
    fn swssb_two_qubits_is_even_sector_projector() {
        let spec = SystemSpec::chain(2, 2).unwrap();
        let (rho, ops) = build_fixed_point(&spec, FixedPointKind::Swssb).unwrap();
        // Oracle: (I + X(x)X)/2 divided by its trace, built by hand.
        let xx = pauli_x().kron(&pauli_x());
        let expected = CMatrix::identity(4).add(&xx).scaled(0.25);
        assert!(rho.matrix().max_abs_diff(&expected) < 1e-12);

        let check = check_strong_symmetry(&rho, ops.symmetry()).unwrap();
        assert!(check.strong && check.weak);
        let phase = check.phase.unwrap();
        assert!((phase - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn src_three_qubits_is_uniform_product() {
        let spec = SystemSpec::chain(3, 2).unwrap();
        let (rho, _) = build_fixed_point(&spec, FixedPointKind::Src).unwrap();
        let amp = c(1.0 / 8.0, 0.0);
        for a in 0..8 {
            for b in 0..8 {
                assert!((rho.matrix()[(a, b)] - amp).norm() < 1e-12);
            }
        }
        let check = check_strong_symmetry(&rho, &shift_product(&spec)).unwrap();
        assert!(check.strong);
        assert!((check.phase.unwrap() - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn src_qutrits_strongly_symmetric_under_shift() {
        let spec = SystemSpec::chain(2, 3).unwrap();
        let (rho, _) = build_fixed_point(&spec, FixedPointKind::Src).unwrap();
        // Oracle: direct matrix check U rho = rho with U = shift(x)shift by hand.
        let u = shift_local(3).kron(&shift_local(3));
        assert!(u.mul(rho.matrix()).max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn ghz_two_qubits_strong_under_xx() {
        let spec = SystemSpec::chain(2, 2).unwrap();
        let (rho, _) = build_fixed_point(&spec, FixedPointKind::Ghz).unwrap();
        let xx = pauli_x().kron(&pauli_x());
        let check = check_strong_symmetry(&rho, &xx).unwrap();
        assert!(check.strong);
        assert!((check.phase.unwrap() - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn classical_mixture_weak_but_not_strong() {
        let spec = SystemSpec::chain(2, 2).unwrap();
        let mut m = CMatrix::zeros(4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        let rho = DensityMatrix::new(spec, m).unwrap();
        let xx = pauli_x().kron(&pauli_x());
        let check = check_strong_symmetry(&rho, &xx).unwrap();
        assert!(!check.strong);
        assert!(check.phase.is_none());
        assert!(check.weak);
    }

    #[test]
    fn maximally_mixed_strong_under_any_unitary() {
        let spec = SystemSpec::single_site(6).unwrap();
        let rho = DensityMatrix::new(spec, CMatrix::identity(6).scaled(1.0 / 6.0)).unwrap();
        let mut rng = sampling::rng(17);
        let u = sampling::random_unitary(6, &mut rng);
        let check = check_strong_symmetry(&rho, &u).unwrap();
        assert!(check.strong && check.weak);
        assert!((check.phase.unwrap() - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn bond_dephased_endpoints() {
        let spec = SystemSpec::chain(4, 2).unwrap();
        let (src, _) = build_fixed_point(&spec, FixedPointKind::Src).unwrap();
        let at_zero = build_bond_dephased(&spec, 0.0).unwrap();
        assert!(at_zero.matrix().max_abs_diff(src.matrix()) < 1e-14);

        let (swssb, _) = build_fixed_point(&spec, FixedPointKind::Swssb).unwrap();
        let at_half = build_bond_dephased(&spec, 0.5).unwrap();
        assert!(at_half.matrix().max_abs_diff(swssb.matrix()) < 1e-10);
    }

    #[test]
    fn bond_dephased_endpoint_qutrit() {
        let spec = SystemSpec::chain(3, 3).unwrap();
        let (swssb, _) = build_fixed_point(&spec, FixedPointKind::Swssb).unwrap();
        let at_end = build_bond_dephased(&spec, 2.0 / 3.0).unwrap();
        assert!(at_end.matrix().max_abs_diff(swssb.matrix()) < 1e-10);
    }

    #[test]
    fn bond_dephased_rejects_out_of_range() {
        let spec = SystemSpec::chain(3, 2).unwrap();
        assert!(build_bond_dephased(&spec, 0.6).is_err());
        assert!(build_bond_dephased(&spec, -0.1).is_err());
    }

    #[test]
    fn charge_phase_is_primitive_root() {
        for n in [2usize, 3, 4] {
            let spec = SystemSpec::chain(2, n).unwrap();
            let ops = ChargeOperatorSet::clock_shift(&spec).unwrap();
            for site in 0..2 {
                let c = ops.charge_phase(site).unwrap();
                let mut p = Complex64::new(1.0, 0.0);
                for _ in 0..n {
                    p *= c;
                }
                assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn eta_four_only_for_self_adjoint_clock() {
        let spec2 = SystemSpec::chain(2, 2).unwrap();
        assert_eq!(ChargeOperatorSet::clock_shift(&spec2).unwrap().eta(), 4);
        let spec3 = SystemSpec::chain(2, 3).unwrap();
        assert_eq!(ChargeOperatorSet::clock_shift(&spec3).unwrap().eta(), 1);
    }

    #[test]
    fn embedded_op_matches_kron() {
        let spec = SystemSpec::chain(3, 2).unwrap();
        let ops = ChargeOperatorSet::clock_shift(&spec).unwrap();
        let z = clock_local(2);
        let id = CMatrix::identity(2);
        let expected = id.kron(&z).kron(&id);
        assert!(ops.embedded_site_op(1).unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn local_application_matches_dense() {
        let spec = SystemSpec::chain(2, 3).unwrap();
        let ops = ChargeOperatorSet::clock_shift(&spec).unwrap();
        let mut rng = sampling::rng(8);
        let m = sampling::random_matrix(9, &mut rng);
        let dense = ops.embedded_site_op(1).unwrap();
        let fast = ops.conjugate(1, &m).unwrap();
        let slow = dense.mul(&m).mul(&dense.adjoint());
        assert!(fast.max_abs_diff(&slow) < 1e-12);
        let fast_left = ops.left_mul(1, &m, true).unwrap();
        let slow_left = dense.adjoint().mul(&m);
        assert!(fast_left.max_abs_diff(&slow_left) < 1e-12);
    }

    #[test]
    fn random_symmetric_states_are_strongly_symmetric() {
        let spec = SystemSpec::chain(3, 2).unwrap();
        let ops = ChargeOperatorSet::clock_shift(&spec).unwrap();
        for seed in 0..5 {
            let rho = build_random_symmetric(&spec, (seed % 2) as usize, 3, seed).unwrap();
            let check = check_strong_symmetry(&rho, ops.symmetry()).unwrap();
            assert!(check.strong, "seed {seed}");
            assert!((check.phase.unwrap().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn density_matrix_rejects_bad_inputs() {
        let spec = SystemSpec::single_site(2).unwrap();
        let mut not_trace_one = CMatrix::identity(2);
        not_trace_one[(1, 1)] = c(0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new(spec.clone(), not_trace_one),
            Err(Error::NotUnitTrace { .. })
        ));

        let mut indefinite = CMatrix::zeros(2);
        indefinite[(0, 0)] = c(1.5, 0.0);
        indefinite[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new(spec, indefinite),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn container_round_trip() {
        let spec = SystemSpec::chain(2, 2).unwrap();
        let (rho, _) = build_fixed_point(&spec, FixedPointKind::Swssb).unwrap();
        let text = container::write_state(rho.matrix());
        let back = container::read_state(&text).unwrap();
        assert!(back.max_abs_diff(rho.matrix()) < 1e-16);
    }

    #[test]
    fn container_rejects_malformed() {
        assert!(container::read_state("").is_err());
        assert!(container::read_state("2\n1 0 0 0\n").is_err());
        assert!(container::read_state("1\n0 0 7\n").is_err());
    }
}
