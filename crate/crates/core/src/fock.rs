//! Brute-force many-body oracle on Fock spaces of at most 12 fermionic modes.
//!
//! Basis states are occupation bit strings, bit k−1 holding n_k (n₁ fastest).
//! Majoranas follow the Jordan–Wigner pairing d_k = (γ_{2k−1} + iγ_{2k})/2, so
//! site fermions of a lattice model are the modes d_k themselves.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, CVec, C64, I, ONE, ZERO};
use crate::monomial::{MajoranaMonomial, Phase};

pub const MAX_MODES: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    n_modes: u32,
}

impl FockSpace {
    pub fn new(n_majoranas: u32) -> Result<Self> {
        if n_majoranas % 2 == 1 {
            return Err(Error::InvalidMonomial(alloc::format!(
                "odd Majorana count {n_majoranas}"
            )));
        }
        Self::with_modes(n_majoranas / 2)
    }

    pub fn with_modes(n_modes: u32) -> Result<Self> {
        if n_modes > MAX_MODES {
            return Err(Error::SpaceTooLarge {
                n_majoranas: 2 * n_modes,
            });
        }
        Ok(Self { n_modes })
    }

    pub fn n_modes(&self) -> u32 {
        self.n_modes
    }

    pub fn n_majoranas(&self) -> u32 {
        2 * self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    /// Basis vector for an occupation pattern (`occ[k]` is n_{k+1}).
    pub fn basis_state(&self, occ: &[u8]) -> CVec {
        let mut v = CVec::zeros(self.dim());
        v[occupation_index(occ)] = ONE;
        v
    }

    fn check(&self, m: &MajoranaMonomial) -> Result<()> {
        if m.max_label() > self.n_majoranas() {
            return Err(Error::LabelOutOfRange {
                label: m.max_label(),
                n_majoranas: self.n_majoranas(),
            });
        }
        Ok(())
    }

    pub fn gamma(&self, i: u32) -> Result<ManyBodyOperator> {
        if i == 0 {
            return Err(Error::LabelOutOfRange {
                label: 0,
                n_majoranas: self.n_majoranas(),
            });
        }
        self.monomial(&MajoranaMonomial::normalize(Phase::ONE, &[i]))
    }

    pub fn monomial(&self, m: &MajoranaMonomial) -> Result<ManyBodyOperator> {
        self.check(m)?;
        let mut out = CMat::zeros(self.dim(), self.dim());
        for b in 0..self.dim() {
            let (p, b2) = m.apply_to_basis(b as u64);
            out[(b2 as usize, b)] = p.to_c64();
        }
        Ok(ManyBodyOperator(out))
    }

    /// exp(θγ_iγ_j) = cos θ + sin θ γ_iγ_j.
    pub fn rotation(&self, i: u32, j: u32, theta: f64) -> Result<ManyBodyOperator> {
        if i == j {
            return Err(Error::InvalidMonomial(alloc::format!("rotation needs i != j, got {i}")));
        }
        let g = self.monomial(&MajoranaMonomial::normalize(Phase::ONE, &[i, j]))?;
        let id = CMat::identity(self.dim(), self.dim());
        Ok(ManyBodyOperator(
            id * C64::from(libm::cos(theta)) + g.0 * C64::from(libm::sin(theta)),
        ))
    }

    pub fn braid(&self, i: u32, j: u32) -> Result<ManyBodyOperator> {
        self.rotation(i, j, core::f64::consts::FRAC_PI_4)
    }

    /// (1 + sign·p)/2 for a Hermitian even monomial p.
    pub fn projector(&self, p: &MajoranaMonomial, sign: i8) -> Result<ManyBodyOperator> {
        if !p.is_hermitian() || !p.is_even() {
            return Err(Error::InvalidMonomial(alloc::format!("{p} is not a Hermitian parity")));
        }
        let m = self.monomial(p)?;
        let id = CMat::identity(self.dim(), self.dim());
        Ok(ManyBodyOperator(
            (id + m.0 * C64::from(sign as f64)) * C64::from(0.5),
        ))
    }
}

pub fn occupation_index(occ: &[u8]) -> usize {
    occ.iter()
        .enumerate()
        .fold(0, |acc, (k, &n)| acc | ((n as usize & 1) << k))
}

/// Applies a monomial to a state vector without forming its matrix.
pub fn apply_monomial(m: &MajoranaMonomial, v: &CVec) -> CVec {
    let mut out = CVec::zeros(v.len());
    for (b, z) in v.iter().enumerate() {
        if *z != ZERO {
            let (p, b2) = m.apply_to_basis(b as u64);
            out[b2 as usize] += p.to_c64() * z;
        }
    }
    out
}

/// Dense many-body matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyOperator(pub CMat);

impl ManyBodyOperator {
    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn unitarity_residual(&self) -> f64 {
        crate::linalg::unitarity_residual(&self.0)
    }

    /// max(|P² − P|, |P† − P|).
    pub fn projector_residual(&self) -> f64 {
        max_abs(&(&self.0 * &self.0 - &self.0)).max(max_abs(&(self.0.adjoint() - &self.0)))
    }
}

/// Linear fermion operator Σ_j α_j c_j + β_j c_j†.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFermion {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
}

impl LinearFermion {
    /// The operator w†Φ for a Nambu vector w = (u; v), Φ = (c; c†).
    pub fn from_nambu(w: &CVec) -> Self {
        let m = w.len() / 2;
        Self {
            alpha: (0..m).map(|j| w[j].conj()).collect(),
            beta: (0..m).map(|j| w[m + j].conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            alpha: self.beta.iter().map(|z| z.conj()).collect(),
            beta: self.alpha.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(v.len());
        for (b, z) in v.iter().enumerate() {
            if *z == ZERO {
                continue;
            }
            for j in 0..self.alpha.len() {
                let occupied = b >> j & 1 == 1;
                let sign = if (b & ((1 << j) - 1)).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                let coef = if occupied { self.alpha[j] } else { self.beta[j] };
                if coef != ZERO {
                    out[b ^ (1 << j)] += coef * z * sign;
                }
            }
        }
        out
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matvec(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(self.dim);
        for r in 0..self.dim {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            out[r] = acc;
        }
        out
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.vals[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

/// Second-quantized ½Φ†HΦ of a BdG matrix, including the constant −½tr h.
pub fn lift_bdg(space: &FockSpace, h: &CMat) -> Result<SparseMatrix> {
    let m = space.n_modes() as usize;
    if h.nrows() != 2 * m || h.ncols() != 2 * m {
        return Err(Error::DimensionMismatch {
            expected: 2 * m,
            found: h.nrows(),
        });
    }
    let res = crate::bdg::phs_residual(h);
    if res > 1e-10 {
        return Err(Error::ParticleHoleViolation { residual: res });
    }
    let herm = crate::linalg::hermiticity_residual(h);
    if herm > 1e-10 {
        return Err(Error::NotHermitian { residual: herm });
    }
    let shift: f64 = -0.5 * (0..m).map(|i| h[(i, i)].re).sum::<f64>();
    let dim = space.dim();
    let sgn = |b: usize, j: usize| -> f64 {
        if (b & ((1 << j) - 1)).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    };
    let mut row_ptr = vec![0usize];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut row: Vec<(usize, C64)> = Vec::new();
    // Build the transpose action (column b) and scatter into rows afterwards.
    let mut entries: Vec<(usize, usize, C64)> = Vec::new();
    for b in 0..dim {
        row.clear();
        let mut diag = C64::from(shift);
        for i in 0..m {
            if b >> i & 1 == 1 {
                diag += h[(i, i)];
            }
        }
        row.push((b, diag));
        for i in 0..m {
            for j in 0..m {
                // h_ij c_i† c_j
                if i != j && b >> j & 1 == 1 && b >> i & 1 == 0 {
                    let z = h[(i, j)];
                    if z != ZERO {
                        let b1 = b ^ (1 << j);
                        let s = sgn(b, j) * sgn(b1, i);
                        row.push((b1 ^ (1 << i), z * s));
                    }
                }
                // ½D_ij c_i† c_j† and ½(−D*)_ij c_i c_j, i ≠ j
                if i != j {
                    let d = h[(i, m + j)];
                    if d != ZERO && b >> j & 1 == 0 && b >> i & 1 == 0 {
                        let b1 = b ^ (1 << j);
                        let s = sgn(b, j) * sgn(b1, i);
                        row.push((b1 ^ (1 << i), d * 0.5 * s));
                    }
                    let e = h[(m + i, j)];
                    if e != ZERO && b >> j & 1 == 1 && b >> i & 1 == 1 {
                        let b1 = b ^ (1 << j);
                        let s = sgn(b, j) * sgn(b1, i);
                        row.push((b1 ^ (1 << i), e * 0.5 * s));
                    }
                }
            }
        }
        for &(r, z) in &row {
            entries.push((r, b, z));
        }
    }
    entries.sort_by_key(|e| (e.0, e.1));
    let mut k = 0;
    for r in 0..dim {
        while k < entries.len() && entries[k].0 == r {
            let (_, c, z) = entries[k];
            if cols.len() > row_ptr[r] && *cols.last().unwrap() == c {
                *vals.last_mut().unwrap() += z;
            } else {
                cols.push(c);
                vals.push(z);
            }
            k += 1;
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseMatrix {
        dim,
        row_ptr,
        cols,
        vals,
    })
}

/// exp(−iĤτ)v by a Taylor series on substeps with ‖Ĥ‖τ_sub ≤ ½.
pub fn expm_apply(h: &SparseMatrix, tau: f64, v: &CVec) -> CVec {
    let norm = h.norm_bound() * tau.abs();
    let steps = libm::ceil(norm / 0.5).max(1.0) as usize;
    let dt = tau / steps as f64;
    let mut state = v.clone();
    for _ in 0..steps {
        let mut term = state.clone();
        let mut acc = state.clone();
        let scale = state.norm().max(1e-300);
        for k in 1..60 {
            term = h.matvec(&term) * (-I * dt / k as f64);
            acc += &term;
            if term.norm() < 1e-17 * scale {
                break;
            }
        }
        state = acc;
    }
    state
}

/// Midpoint-rule evolution of a state through a time-dependent BdG path.
pub fn evolve_state<F>(space: &FockSpace, path: F, t_grid: &[f64], v: &CVec) -> Result<CVec>
where
    F: Fn(f64) -> Result<CMat>,
{
    let mut state = v.clone();
    for w in t_grid.windows(2) {
        let h = lift_bdg(space, &path(0.5 * (w[0] + w[1]))?)?;
        state = expm_apply(&h, w[1] - w[0], &state);
    }
    Ok(state)
}

/// [`evolve_state`] for several states sharing one path, lifting each
/// step's Hamiltonian once.
pub fn evolve_states<F>(space: &FockSpace, path: F, t_grid: &[f64], states: &mut [CVec]) -> Result<()>
where
    F: Fn(f64) -> Result<CMat>,
{
    for w in t_grid.windows(2) {
        let h = lift_bdg(space, &path(0.5 * (w[0] + w[1]))?)?;
        for v in states.iter_mut() {
            *v = expm_apply(&h, w[1] - w[0], v);
        }
    }
    Ok(())
}

/// Many-body propagator of a BdG path on the grid, as a dense operator.
pub fn quadratic_hamiltonian_evolution<F>(
    space: &FockSpace,
    path: F,
    t_grid: &[f64],
) -> Result<ManyBodyOperator>
where
    F: Fn(f64) -> Result<CMat>,
{
    let dim = space.dim();
    let hs: Vec<(SparseMatrix, f64)> = t_grid
        .windows(2)
        .map(|w| Ok((lift_bdg(space, &path(0.5 * (w[0] + w[1]))?)?, w[1] - w[0])))
        .collect::<Result<_>>()?;
    let mut u = CMat::zeros(dim, dim);
    for b in 0..dim {
        let mut v = CVec::zeros(dim);
        v[b] = ONE;
        for (h, dt) in &hs {
            v = expm_apply(h, *dt, &v);
        }
        u.set_column(b, &v);
    }
    Ok(ManyBodyOperator(u))
}

/// Common vacuum of the given annihilators, ∏_k d_k d_k† applied to a seed,
/// normalized. Seeds are tried in basis order, then a dense fallback.
pub fn vacuum(space: &FockSpace, annihilators: &[LinearFermion]) -> Result<CVec> {
    let project = |mut v: CVec| {
        for d in annihilators {
            v = d.apply(&d.adjoint().apply(&v));
        }
        v
    };
    let dim = space.dim();
    let mut best: Option<CVec> = None;
    for b in 0..dim.min(64) {
        let mut seed = CVec::zeros(dim);
        seed[b] = ONE;
        let v = project(seed);
        if v.norm() > 1e-3 {
            best = Some(v);
            break;
        }
    }
    let v = match best {
        Some(v) => v,
        None => {
            let seed = CVec::from_fn(dim, |k, _| C64::new(1.0 + k as f64 * 1e-3, 0.5));
            project(seed)
        }
    };
    let n = v.norm();
    if n < 1e-12 {
        return Err(Error::Numerical(alloc::string::String::from(
            "annihilators have no common vacuum",
        )));
    }
    Ok(v.unscale(n))
}
