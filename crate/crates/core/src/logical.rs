//! Logical-gate prediction for Clifford schedules on sparse-encoded qubits.
//!
//! Qubit i (1-based) lives on γ_{4i−3..4i} with logical operators
//! Z_i = −iγ_{4i−3}γ_{4i−2} and X_i = −iγ_{4i−2}γ_{4i−1}; |1_L⟩ = X_i|0_L⟩ is the
//! Fock state with both modes of the quadruple occupied. Code stabilizers and
//! logical images are pushed through braids and projections; the resulting
//! map on the logical basis is fixed up to one global phase.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, I, ONE, ZERO};
use crate::monomial::{MajoranaMonomial, Phase};
use crate::stabilizer::{braid_image, group_sign};

/// A Clifford step on Majorana labels.
#[derive(Clone, Debug, PartialEq)]
pub enum CliffordOp {
    /// B_ij = exp(π/4 γ_iγ_j).
    Braid(u32, u32),
    /// exp(k·π/4 γ_iγ_j).
    QuarterTurns(u32, u32, i32),
    /// √2·(1 + outcome·p)/2.
    Project(MajoranaMonomial, i8),
}

#[derive(Clone, Debug)]
pub struct LogicalTracker {
    n_qubits: u32,
    stabilizers: Vec<MajoranaMonomial>,
    xs: Vec<MajoranaMonomial>,
    zs: Vec<MajoranaMonomial>,
    /// Column norm picked up from deterministic √2-scaled projections.
    scale: f64,
}

pub fn logical_z(q: u32) -> MajoranaMonomial {
    MajoranaMonomial::pair(4 * q - 3, 4 * q - 2)
}

pub fn logical_x(q: u32) -> MajoranaMonomial {
    MajoranaMonomial::pair(4 * q - 2, 4 * q - 1)
}

/// Fock bit pattern of the logical basis state with index `x` (qubit 1 = bit 0).
pub fn logical_bits(x: usize, n_qubits: u32) -> u64 {
    let mut bits = 0u64;
    for q in 0..n_qubits as usize {
        if x >> q & 1 == 1 {
            bits |= 0b11 << (2 * q);
        }
    }
    bits
}

type Sparse = BTreeMap<u64, C64>;

fn apply(m: &MajoranaMonomial, v: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for (&b, &z) in v {
        let (p, b2) = m.apply_to_basis(b);
        *out.entry(b2).or_insert(ZERO) += p.to_c64() * z;
    }
    out.retain(|_, z| z.norm() > 1e-14);
    out
}

fn project_plus(m: &MajoranaMonomial, v: &Sparse) -> Sparse {
    let mv = apply(m, v);
    let mut out = v.clone();
    for (b, z) in mv {
        *out.entry(b).or_insert(ZERO) += z;
    }
    for z in out.values_mut() {
        *z *= 0.5;
    }
    out.retain(|_, z| z.norm() > 1e-14);
    out
}

fn norm(v: &Sparse) -> f64 {
    libm::sqrt(v.values().map(|z| z.norm_sqr()).sum())
}

impl LogicalTracker {
    /// Starts from the sparse logical frame of `n_qubits` qubits.
    pub fn sparse(n_qubits: u32) -> Self {
        Self {
            n_qubits,
            stabilizers: (1..=n_qubits)
                .map(|i| MajoranaMonomial::quad(4 * i - 3, 4 * i - 2, 4 * i - 1, 4 * i))
                .collect(),
            xs: (1..=n_qubits).map(logical_x).collect(),
            zs: (1..=n_qubits).map(logical_z).collect(),
            scale: 1.0,
        }
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn n_majoranas(&self) -> u32 {
        4 * self.n_qubits
    }

    pub fn stabilizers(&self) -> &[MajoranaMonomial] {
        &self.stabilizers
    }

    pub fn logical_xs(&self) -> &[MajoranaMonomial] {
        &self.xs
    }

    pub fn logical_zs(&self) -> &[MajoranaMonomial] {
        &self.zs
    }

    fn check_label(&self, l: u32) -> Result<()> {
        if l == 0 || l > self.n_majoranas() {
            return Err(Error::LabelOutOfRange {
                label: l,
                n_majoranas: self.n_majoranas(),
            });
        }
        Ok(())
    }

    pub fn apply(&mut self, op: &CliffordOp) -> Result<()> {
        match op {
            CliffordOp::Braid(i, j) => self.braid(*i, *j),
            CliffordOp::QuarterTurns(i, j, k) => {
                for _ in 0..k.rem_euclid(4) {
                    self.braid(*i, *j)?;
                }
                Ok(())
            }
            CliffordOp::Project(p, s) => self.project(p, *s),
        }
    }

    pub fn braid(&mut self, i: u32, j: u32) -> Result<()> {
        self.check_label(i)?;
        self.check_label(j)?;
        if i == j {
            return Err(Error::InvalidMonomial(format!("braid needs two labels, got {i} twice")));
        }
        for m in self
            .stabilizers
            .iter_mut()
            .chain(self.xs.iter_mut())
            .chain(self.zs.iter_mut())
        {
            *m = braid_image(m, i, j);
        }
        Ok(())
    }

    /// Applies √2·(1 + outcome·p)/2.
    pub fn project(&mut self, p: &MajoranaMonomial, outcome: i8) -> Result<()> {
        self.check_label(p.max_label().max(1))?;
        if !p.is_hermitian() || !p.is_even() || p.is_empty() {
            return Err(Error::InvalidMonomial(format!("{p} is not a parity observable")));
        }
        if let Some(k) = self.stabilizers.iter().position(|g| !g.commutes_with(p)) {
            let old = self.stabilizers[k].clone();
            for (idx, g) in self.stabilizers.iter_mut().enumerate() {
                if idx == k {
                    *g = p.scaled(Phase::sign(outcome));
                } else if !g.commutes_with(p) {
                    *g = &*g * &old;
                }
            }
            for l in self.xs.iter_mut().chain(self.zs.iter_mut()) {
                if !l.commutes_with(p) {
                    *l = &*l * &old;
                }
            }
            return Ok(());
        }
        if let Some(l) = self.xs.iter().chain(&self.zs).find(|l| !l.commutes_with(p)) {
            return Err(Error::LogicalMeasurement(format!("{p} (anticommutes with logical {l})")));
        }
        match group_sign(&self.stabilizers, self.n_majoranas(), p) {
            Some(s) if s == outcome => {
                self.scale *= core::f64::consts::SQRT_2;
                Ok(())
            }
            Some(s) => Err(Error::ForcedOutcomeMismatch {
                forced: s,
                requested: outcome,
            }),
            None => Err(Error::Numerical(format!("{p} is outside the tracked group"))),
        }
    }

    /// The logical map W[y][x] implied by the tracked frame, fixed up to a
    /// global phase; rows and columns index logical states with qubit 1 fastest.
    pub fn predicted_unitary(&self) -> Result<CMat> {
        let n = self.n_qubits;
        for i in 1..=n {
            let q = MajoranaMonomial::quad(4 * i - 3, 4 * i - 2, 4 * i - 1, 4 * i);
            if group_sign(&self.stabilizers, self.n_majoranas(), &q) != Some(1) {
                let constraint = format!("{q}");
                let generator = self
                    .stabilizers
                    .iter()
                    .find(|g| !g.commutes_with(&q))
                    .map(|g| format!("{g}"))
                    .unwrap_or_else(|| String::from("(odd-parity frame)"));
                return Err(Error::NotInLogicalSubspace {
                    generator,
                    constraint,
                });
            }
        }
        let dim = 1usize << n;
        // u0: joint +1 eigenvector of the stabilizers and the Z images.
        let mut u0 = None;
        for y in 0..dim {
            let mut v = Sparse::new();
            v.insert(logical_bits(y, n), ONE);
            for g in self.stabilizers.iter().chain(&self.zs) {
                v = project_plus(g, &v);
            }
            let nv = norm(&v);
            if nv > 1e-6 {
                // Largest component real positive.
                let (_, &zmax) = v
                    .iter()
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .unwrap();
                let ph = zmax.conj() / zmax.norm();
                for z in v.values_mut() {
                    *z *= ph / nv;
                }
                u0 = Some(v);
                break;
            }
        }
        let u0 = u0.ok_or_else(|| Error::Numerical(String::from("empty logical image")))?;
        let mut w = CMat::zeros(dim, dim);
        for x in 0..dim {
            let mut v = u0.clone();
            for q in (0..n as usize).rev() {
                if x >> q & 1 == 1 {
                    v = apply(&self.xs[q], &v);
                }
            }
            for y in 0..dim {
                w[(y, x)] = v.get(&logical_bits(y, n)).copied().unwrap_or(ZERO) * self.scale;
            }
        }
        Ok(w)
    }
}

/// Dense-encoding braid word realizing CNOT (control 1, target 2) between the
/// Π⁻₄₅ and Π⁻₁₂₃₄ projections. The three braids commute.
pub const DENSE_CNOT_WORD: [(u32, u32); 3] = [(1, 2), (6, 7), (8, 3)];

/// Dense-encoding braid word realizing CZ between the same projections.
pub const DENSE_CZ_WORD: [(u32, u32); 3] = [(1, 2), (7, 8), (6, 3)];

/// Single-qubit gates of the braid glossary, in the |0⟩,|1⟩ basis.
pub fn single_qubit_gates() -> Vec<(&'static str, [C64; 4])> {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| C64::new(x, 0.0);
    let ir = I * r;
    vec![
        ("sqrt_X", [c(r), ir, ir, c(r)]),
        ("sqrt_X_dag", [c(r), -ir, -ir, c(r)]),
        ("sqrt_Z", [c(r) + ir, ZERO, ZERO, c(r) - ir]),
        ("sqrt_Z_dag", [c(r) - ir, ZERO, ZERO, c(r) + ir]),
        ("X", [ZERO, ONE, ONE, ZERO]),
        ("Y", [ZERO, -I, I, ZERO]),
        ("Z", [ONE, ZERO, ZERO, -ONE]),
        ("H", [c(r), c(r), c(r), c(-r)]),
        ("T", [ONE, ZERO, ZERO, C64::from_polar(1.0, core::f64::consts::FRAC_PI_4)]),
    ]
}

/// Embeds a 2×2 gate (row-major) on `qubit` (0-based) of an n-qubit register.
pub fn embed_single(g: &[C64; 4], qubit: usize, n: usize) -> CMat {
    let dim = 1 << n;
    CMat::from_fn(dim, dim, |y, x| {
        let others = !(1usize << qubit);
        if y & others != x & others {
            return ZERO;
        }
        g[2 * (y >> qubit & 1) + (x >> qubit & 1)]
    })
}

/// CNOT with 0-based control and target.
pub fn cnot(control: usize, target: usize, n: usize) -> CMat {
    let dim = 1 << n;
    CMat::from_fn(dim, dim, |y, x| {
        let want = if x >> control & 1 == 1 { x ^ (1 << target) } else { x };
        if y == want {
            ONE
        } else {
            ZERO
        }
    })
}

pub fn cz(a: usize, b: usize, n: usize) -> CMat {
    let dim = 1 << n;
    CMat::from_fn(dim, dim, |y, x| {
        if y != x {
            ZERO
        } else if x >> a & 1 == 1 && x >> b & 1 == 1 {
            -ONE
        } else {
            ONE
        }
    })
}

/// Phase-invariant overlap |tr(A†B)|² / (d·tr(B†B)).
pub fn process_overlap(target: &CMat, t: &CMat) -> f64 {
    let d = target.nrows() as f64;
    let num = (target.adjoint() * t).trace().norm_sqr();
    let den = d * (t.adjoint() * t).trace().re;
    if den <= 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// Names a logical map from the glossary (identity, single-qubit gates,
/// CNOT, CZ), up to global phase.
pub fn identify_gate(w: &CMat) -> Option<String> {
    let dim = w.nrows();
    let n = dim.trailing_zeros() as usize;
    let hit = |g: &CMat| process_overlap(g, w) > 1.0 - 1e-9;
    if hit(&CMat::identity(dim, dim)) {
        return Some(String::from("identity"));
    }
    for (name, g) in single_qubit_gates() {
        for q in 0..n {
            if hit(&embed_single(&g, q, n)) {
                return Some(format!("{name} on qubit {}", q + 1));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && hit(&cnot(a, b, n)) {
                return Some(format!("CNOT control {} target {}", a + 1, b + 1));
            }
            if a < b && hit(&cz(a, b, n)) {
                return Some(format!("CZ on qubits {} {}", a + 1, b + 1));
            }
        }
    }
    None
}
