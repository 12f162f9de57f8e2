//! Majorana monomials: a fourth root of unity times an ordered product of
//! Majorana operators γ_i with γ_i² = 1 and {γ_i, γ_j} = 2δ_ij.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Mul, Neg};
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Element of {+1, +i, −1, −i}, stored as the exponent of i.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn sign(s: i8) -> Phase {
        if s < 0 {
            Phase::MINUS_ONE
        } else {
            Phase::ONE
        }
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn to_c64(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        self * Phase::MINUS_ONE
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

impl FromStr for Phase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Phase> {
        match s {
            "+1" | "1" => Ok(Phase::ONE),
            "-1" => Ok(Phase::MINUS_ONE),
            "+i" | "i" => Ok(Phase::I),
            "-i" => Ok(Phase::MINUS_I),
            _ => Err(Error::Parse(format!("bad phase token {s:?}"))),
        }
    }
}

/// `phase · γ_{indices[0]} γ_{indices[1]} …` with strictly increasing 1-based labels.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct MajoranaMonomial {
    phase: Phase,
    indices: Vec<u32>,
}

impl MajoranaMonomial {
    pub fn identity() -> Self {
        Self {
            phase: Phase::ONE,
            indices: Vec::new(),
        }
    }

    /// Brings `phase · γ_{raw[0]} γ_{raw[1]} …` to normal form.
    ///
    /// Panics on label 0.
    pub fn normalize(phase: Phase, raw: &[u32]) -> Self {
        assert!(raw.iter().all(|&l| l > 0), "Majorana labels are 1-based");
        let mut out: Vec<u32> = Vec::with_capacity(raw.len());
        let mut sign = false;
        // Push each factor to its slot from the right: it passes every larger
        // label already present.
        for &k in raw {
            let pos = out.partition_point(|&x| x < k);
            let passed = out.len() - pos;
            let hit = pos < out.len() && out[pos] == k;
            let swaps = if hit { passed - 1 } else { passed };
            if swaps % 2 == 1 {
                sign = !sign;
            }
            if hit {
                out.remove(pos);
            } else {
                out.insert(pos, k);
            }
        }
        let phase = if sign { -phase } else { phase };
        Self {
            phase,
            indices: out,
        }
    }

    /// Builds from already sorted labels; errors if they are not strictly increasing.
    pub fn new(phase: Phase, indices: Vec<u32>) -> Result<Self> {
        if indices.contains(&0) || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMonomial(format!(
                "labels must be positive and strictly increasing: {indices:?}"
            )));
        }
        Ok(Self { phase, indices })
    }

    /// Hermitian pair parity −iγ_aγ_b (for a < b).
    pub fn pair(a: u32, b: u32) -> Self {
        Self::normalize(Phase::MINUS_I, &[a, b])
    }

    /// Quadruple parity −γ_aγ_bγ_cγ_d.
    pub fn quad(a: u32, b: u32, c: u32, d: u32) -> Self {
        Self::normalize(Phase::MINUS_ONE, &[a, b, c, d])
    }

    /// Hermitian product of all labels 1..=n, with the phase making it
    /// the product of pair parities −iγ_{2k−1}γ_{2k}.
    pub fn total_parity(n_majoranas: u32) -> Self {
        let mut m = Self::identity();
        for k in 1..=n_majoranas / 2 {
            m = &m * &Self::pair(2 * k - 1, 2 * k);
        }
        m
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.indices.is_empty() && self.phase == Phase::ONE
    }

    pub fn is_even(&self) -> bool {
        self.indices.len().is_multiple_of(2)
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        Self {
            phase,
            indices: self.indices.clone(),
        }
    }

    pub fn scaled(&self, phase: Phase) -> Self {
        self.with_phase(self.phase * phase)
    }

    /// Reversing m factors takes m(m−1)/2 transpositions.
    fn reversal_sign(&self) -> Phase {
        let m = self.indices.len();
        if (m * m.saturating_sub(1) / 2) % 2 == 1 {
            Phase::MINUS_ONE
        } else {
            Phase::ONE
        }
    }

    pub fn adjoint(&self) -> Self {
        self.with_phase(self.phase.conj() * self.reversal_sign())
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint() == *self
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let shared = count_shared(&self.indices, &other.indices);
        (self.indices.len() * other.indices.len() + shared).is_multiple_of(2)
    }

    pub fn max_label(&self) -> u32 {
        self.indices.last().copied().unwrap_or(0)
    }

    /// Applies the monomial to the occupation basis state `bits`
    /// (bit k−1 is n_k for the pair (γ_{2k−1}, γ_{2k})).
    pub fn apply_to_basis(&self, bits: u64) -> (Phase, u64) {
        let mut phase = self.phase;
        let mut state = bits;
        for &l in self.indices.iter().rev() {
            let (p, s) = gamma_on_basis(l, state);
            phase = phase * p;
            state = s;
        }
        (phase, state)
    }

    /// Image under a label substitution γ_l ↦ s(l)·γ_{σ(l)}.
    pub fn substitute<F: Fn(u32) -> (Phase, u32)>(&self, f: F) -> Self {
        let mut phase = self.phase;
        let mut raw = Vec::with_capacity(self.indices.len());
        for &l in &self.indices {
            let (p, m) = f(l);
            phase = phase * p;
            raw.push(m);
        }
        Self::normalize(phase, &raw)
    }
}

fn count_shared(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Jordan–Wigner action of a single γ_l on an occupation basis state.
pub fn gamma_on_basis(label: u32, bits: u64) -> (Phase, u64) {
    let k = (label - 1) / 2;
    let below = (bits & ((1u64 << k) - 1)).count_ones();
    let mut phase = if below % 2 == 1 {
        Phase::MINUS_ONE
    } else {
        Phase::ONE
    };
    if label.is_multiple_of(2) {
        phase = phase
            * if bits >> k & 1 == 0 {
                Phase::I
            } else {
                Phase::MINUS_I
            };
    }
    (phase, bits ^ (1u64 << k))
}

impl Mul for &MajoranaMonomial {
    type Output = MajoranaMonomial;
    fn mul(self, rhs: &MajoranaMonomial) -> MajoranaMonomial {
        let mut raw = self.indices.clone();
        raw.extend_from_slice(&rhs.indices);
        MajoranaMonomial::normalize(self.phase * rhs.phase, &raw)
    }
}

impl Mul for MajoranaMonomial {
    type Output = MajoranaMonomial;
    fn mul(self, rhs: MajoranaMonomial) -> MajoranaMonomial {
        &self * &rhs
    }
}

impl Neg for MajoranaMonomial {
    type Output = MajoranaMonomial;
    fn neg(self) -> MajoranaMonomial {
        self.scaled(Phase::MINUS_ONE)
    }
}

/// Line form: phase token followed by labels, e.g. `-i 1 2`.
impl fmt::Display for MajoranaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for l in &self.indices {
            write!(f, " {l}")?;
        }
        Ok(())
    }
}

impl FromStr for MajoranaMonomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut tok = s.split_whitespace();
        let phase: Phase = tok
            .next()
            .ok_or_else(|| Error::Parse(String::from("empty monomial line")))?
            .parse()?;
        let mut raw = Vec::new();
        for t in tok {
            let l: u32 = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad label {t:?}")))?;
            if l == 0 {
                return Err(Error::Parse(String::from("labels are 1-based")));
            }
            raw.push(l);
        }
        Ok(Self::normalize(phase, &raw))
    }
}
