//! Stabilizer groups over Majorana monomials: braid conjugation, parity
//! measurement updates, encoding layouts and Jordan–Wigner Pauli readout.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::monomial::{MajoranaMonomial, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Determinism {
    Deterministic,
    Random,
}

/// Commuting, independent, Hermitian generators on `n_majoranas` labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StabilizerSet {
    n_majoranas: u32,
    generators: Vec<MajoranaMonomial>,
}

impl StabilizerSet {
    /// The Fock vacuum: generators −iγ_{2k−1}γ_{2k}.
    pub fn vacuum(n_majoranas: u32) -> Self {
        let generators = (1..=n_majoranas / 2)
            .map(|k| MajoranaMonomial::pair(2 * k - 1, 2 * k))
            .collect();
        Self {
            n_majoranas,
            generators,
        }
    }

    pub fn new(n_majoranas: u32, generators: Vec<MajoranaMonomial>) -> Result<Self> {
        for g in &generators {
            if g.max_label() > n_majoranas {
                return Err(Error::LabelOutOfRange {
                    label: g.max_label(),
                    n_majoranas,
                });
            }
            if !g.is_hermitian() || g.is_empty() {
                return Err(Error::InvalidMonomial(format!("{g} is not a Hermitian generator")));
            }
        }
        for (a, ga) in generators.iter().enumerate() {
            for gb in &generators[a + 1..] {
                if !ga.commutes_with(gb) {
                    return Err(Error::InvalidMonomial(format!("{ga} anticommutes with {gb}")));
                }
            }
        }
        if Reducer::new(&generators, n_majoranas).dependent {
            return Err(Error::InvalidMonomial(String::from("generators are not independent")));
        }
        Ok(Self {
            n_majoranas,
            generators,
        })
    }

    pub fn n_majoranas(&self) -> u32 {
        self.n_majoranas
    }

    pub fn generators(&self) -> &[MajoranaMonomial] {
        &self.generators
    }

    fn check_label(&self, l: u32) -> Result<()> {
        if l == 0 || l > self.n_majoranas {
            Err(Error::LabelOutOfRange {
                label: l,
                n_majoranas: self.n_majoranas,
            })
        } else {
            Ok(())
        }
    }

    /// Conjugation by B_ij = (1 + γ_iγ_j)/√2: γ_i ↦ −γ_j, γ_j ↦ γ_i.
    pub fn conjugate_by_braid(&self, i: u32, j: u32) -> Result<Self> {
        self.check_label(i)?;
        self.check_label(j)?;
        if i == j {
            return Err(Error::InvalidMonomial(format!("braid needs two labels, got {i} twice")));
        }
        Ok(Self {
            n_majoranas: self.n_majoranas,
            generators: self.generators.iter().map(|g| braid_image(g, i, j)).collect(),
        })
    }

    /// Sign s with s·p in the group, or None when p is not generated.
    pub fn group_sign(&self, p: &MajoranaMonomial) -> Option<i8> {
        group_sign(&self.generators, self.n_majoranas, p)
    }

    /// Projects onto the `outcome` eigenspace of `p`.
    pub fn measure_parity(&self, p: &MajoranaMonomial, outcome: i8) -> Result<(Self, Determinism)> {
        self.check_observable(p)?;
        match self.generators.iter().position(|g| !g.commutes_with(p)) {
            Some(k) => Ok((self.replace_anticommuting(k, p, outcome), Determinism::Random)),
            None => match self.group_sign(p) {
                Some(s) if s == outcome => Ok((self.clone(), Determinism::Deterministic)),
                Some(s) => Err(Error::ForcedOutcomeMismatch {
                    forced: s,
                    requested: outcome,
                }),
                None => {
                    // Incomplete group: p becomes a new generator.
                    let mut next = self.clone();
                    next.generators.push(p.scaled(Phase::sign(outcome)));
                    Ok((next, Determinism::Random))
                }
            },
        }
    }

    /// Like [`measure_parity`](Self::measure_parity) but draws random outcomes 50/50.
    pub fn measure_parity_sampled<R: RngCore>(
        &self,
        p: &MajoranaMonomial,
        rng: &mut R,
    ) -> Result<(Self, Determinism, i8)> {
        self.check_observable(p)?;
        let forced = if self.generators.iter().all(|g| g.commutes_with(p)) {
            self.group_sign(p)
        } else {
            None
        };
        let outcome = forced.unwrap_or(if rng.next_u32() & 1 == 0 { 1 } else { -1 });
        let (s, d) = self.measure_parity(p, outcome)?;
        Ok((s, d, outcome))
    }

    fn check_observable(&self, p: &MajoranaMonomial) -> Result<()> {
        self.check_label(p.max_label().max(1))?;
        if !p.is_hermitian() || !p.is_even() || p.is_empty() {
            return Err(Error::InvalidMonomial(format!(
                "{p} is not a Hermitian even parity observable"
            )));
        }
        Ok(())
    }

    fn replace_anticommuting(&self, k: usize, p: &MajoranaMonomial, outcome: i8) -> Self {
        let old = self.generators[k].clone();
        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(idx, g)| {
                if idx == k {
                    p.scaled(Phase::sign(outcome))
                } else if !g.commutes_with(p) {
                    g * &old
                } else {
                    g.clone()
                }
            })
            .collect();
        Self {
            n_majoranas: self.n_majoranas,
            generators,
        }
    }

    /// One monomial per line, preceded by a `# majoranas N` header.
    pub fn to_text(&self) -> String {
        let mut s = format!("# majoranas {}\n", self.n_majoranas);
        for g in &self.generators {
            s.push_str(&format!("{g}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut gens = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("majoranas") {
                    let v = it.next().and_then(|v| v.parse().ok());
                    n = Some(v.ok_or_else(|| Error::Parse(format!("bad header {line:?}")))?);
                }
                continue;
            }
            if !line.is_empty() {
                gens.push(line.parse::<MajoranaMonomial>()?);
            }
        }
        let n = n.unwrap_or_else(|| {
            let m = gens.iter().map(|g| g.max_label()).max().unwrap_or(0);
            m + m % 2
        });
        Self::new(n, gens)
    }
}

impl fmt::Display for StabilizerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Image of a monomial under γ_i ↦ −γ_j, γ_j ↦ γ_i.
pub fn braid_image(g: &MajoranaMonomial, i: u32, j: u32) -> MajoranaMonomial {
    g.substitute(|l| {
        if l == i {
            (Phase::MINUS_ONE, j)
        } else if l == j {
            (Phase::ONE, i)
        } else {
            (Phase::ONE, l)
        }
    })
}

/// Sign s such that s·p is the product of a subset of `gens`.
pub fn group_sign(gens: &[MajoranaMonomial], n_majoranas: u32, p: &MajoranaMonomial) -> Option<i8> {
    let red = Reducer::new(gens, n_majoranas.max(p.max_label()));
    let prod = red.express(gens, p)?;
    if prod.phase() == p.phase() {
        Some(1)
    } else if prod.phase() == -p.phase() {
        Some(-1)
    } else {
        None
    }
}

/// GF(2) elimination on label supports, tracking which generators combine.
struct Reducer {
    words: usize,
    rows: Vec<(usize, Vec<u64>, Vec<u64>)>,
    dependent: bool,
}

impl Reducer {
    fn support(m: &MajoranaMonomial, words: usize) -> Vec<u64> {
        let mut v = vec![0u64; words];
        for &l in m.indices() {
            let b = (l - 1) as usize;
            v[b / 64] |= 1 << (b % 64);
        }
        v
    }

    fn new(gens: &[MajoranaMonomial], n_labels: u32) -> Self {
        let words = (n_labels as usize).div_ceil(64).max(1);
        let cwords = gens.len().div_ceil(64).max(1);
        let mut r = Self {
            words,
            rows: Vec::new(),
            dependent: false,
        };
        for (k, g) in gens.iter().enumerate() {
            let mut combo = vec![0u64; cwords];
            combo[k / 64] |= 1 << (k % 64);
            let (v, c) = r.reduce(Self::support(g, words), combo);
            match first_bit(&v) {
                None => r.dependent = true,
                Some(piv) => {
                    for row in r.rows.iter_mut() {
                        if bit(&row.1, piv) {
                            xor(&mut row.1, &v);
                            xor(&mut row.2, &c);
                        }
                    }
                    r.rows.push((piv, v, c));
                }
            }
        }
        r
    }

    fn reduce(&self, mut v: Vec<u64>, mut c: Vec<u64>) -> (Vec<u64>, Vec<u64>) {
        for (piv, b, cc) in &self.rows {
            if bit(&v, *piv) {
                xor(&mut v, b);
                xor(&mut c, cc);
            }
        }
        (v, c)
    }

    /// Ordered product of the generators whose supports XOR to p's support.
    fn express(&self, gens: &[MajoranaMonomial], p: &MajoranaMonomial) -> Option<MajoranaMonomial> {
        let cwords = gens.len().div_ceil(64).max(1);
        let (v, c) = self.reduce(Self::support(p, self.words), vec![0u64; cwords]);
        if first_bit(&v).is_some() {
            return None;
        }
        let mut prod = MajoranaMonomial::identity();
        for (k, g) in gens.iter().enumerate() {
            if bit(&c, k) {
                prod = &prod * g;
            }
        }
        Some(prod)
    }
}

fn bit(v: &[u64], b: usize) -> bool {
    v[b / 64] >> (b % 64) & 1 == 1
}

fn xor(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingKind {
    Sparse,
    Dense,
}

/// Assignment of Majorana labels to logical qubits plus the parity
/// constraints fixed to +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingLayout {
    pub kind: EncodingKind,
    pub n_majoranas: u32,
    /// Labels per qubit; for dense layouts the last entry is the ancilla pair.
    pub qubit_map: Vec<Vec<u32>>,
    pub parity_constraints: Vec<MajoranaMonomial>,
}

impl EncodingLayout {
    /// Four Majoranas per qubit, constraint −γ_{4i−3}γ_{4i−2}γ_{4i−1}γ_{4i} = +1.
    pub fn sparse(n_qubits: u32) -> Self {
        let qubit_map = (1..=n_qubits)
            .map(|i| (4 * i - 3..=4 * i).collect())
            .collect();
        let parity_constraints = (1..=n_qubits)
            .map(|i| MajoranaMonomial::quad(4 * i - 3, 4 * i - 2, 4 * i - 1, 4 * i))
            .collect();
        Self {
            kind: EncodingKind::Sparse,
            n_majoranas: 4 * n_qubits,
            qubit_map,
            parity_constraints,
        }
    }

    /// One pair per qubit plus an ancilla pair; only total parity is fixed.
    pub fn dense(n_qubits: u32) -> Self {
        let n_majoranas = 2 * (n_qubits + 1);
        let qubit_map = (1..=n_qubits + 1).map(|k| vec![2 * k - 1, 2 * k]).collect();
        Self {
            kind: EncodingKind::Dense,
            n_majoranas,
            qubit_map,
            parity_constraints: vec![MajoranaMonomial::total_parity(n_majoranas)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self.kind {
            EncodingKind::Sparse => self.qubit_map.len(),
            EncodingKind::Dense => self.qubit_map.len() - 1,
        }
    }

    /// Qubit hosting a label, if any.
    pub fn qubit_of(&self, label: u32) -> Option<usize> {
        self.qubit_map.iter().position(|q| q.contains(&label))
    }

    /// Errors if any generator anticommutes with a parity constraint.
    pub fn check(&self, s: &StabilizerSet) -> Result<()> {
        for g in s.generators() {
            for c in &self.parity_constraints {
                if !g.commutes_with(c) {
                    return Err(Error::NotInLogicalSubspace {
                        generator: format!("{g}"),
                        constraint: format!("{c}"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-site product a·b = phase·c.
    fn mul(a: Pauli, b: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (X, X) | (Y, Y) | (Z, Z) => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MINUS_I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MINUS_I, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MINUS_I, Y),
        }
    }
}

/// Phase times a tensor product of single-qubit Paulis (qubit 1 first).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub phase: Phase,
    pub ops: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            phase: Phase::ONE,
            ops: vec![Pauli::I; n],
        }
    }

    /// Jordan–Wigner image of γ_l: (∏_{j<k} Z_j) X_k or (∏_{j<k} Z_j) Y_k.
    pub fn of_gamma(label: u32, n: usize) -> Self {
        let k = ((label - 1) / 2) as usize;
        let mut s = Self::identity(n);
        for op in s.ops.iter_mut().take(k) {
            *op = Pauli::Z;
        }
        s.ops[k] = if label % 2 == 1 { Pauli::X } else { Pauli::Y };
        s
    }

    pub fn of_monomial(m: &MajoranaMonomial, n: usize) -> Self {
        let mut s = Self::identity(n);
        s.phase = m.phase();
        for &l in m.indices() {
            s = s.mul(&Self::of_gamma(l, n));
        }
        s
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut phase = self.phase * rhs.phase;
        let ops = self
            .ops
            .iter()
            .zip(&rhs.ops)
            .map(|(&a, &b)| {
                let (p, c) = Pauli::mul(a, b);
                phase = phase * p;
                c
            })
            .collect();
        Self { phase, ops }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase.power() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        let mut any = false;
        for (q, op) in self.ops.iter().enumerate() {
            let c = match op {
                Pauli::I => continue,
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            if any {
                f.write_str(" ")?;
            }
            write!(f, "{c}{}", q + 1)?;
            any = true;
        }
        if !any {
            f.write_str("I")?;
        }
        Ok(())
    }
}

/// Jordan–Wigner Pauli strings of every generator, after checking the layout.
pub fn logical_readout(s: &StabilizerSet, layout: &EncodingLayout) -> Result<Vec<PauliString>> {
    if layout.n_majoranas < s.n_majoranas() {
        return Err(Error::DimensionMismatch {
            expected: s.n_majoranas() as usize,
            found: layout.n_majoranas as usize,
        });
    }
    layout.check(s)?;
    let n = layout.n_majoranas.div_ceil(2) as usize;
    Ok(s
        .generators()
        .iter()
        .map(|g| PauliString::of_monomial(g, n))
        .collect())
}

/// Braid word: one `i j` pair per line, `#` starts a comment.
pub fn braid_word_to_text(word: &[(u32, u32)]) -> String {
    let mut s = String::new();
    for (i, j) in word {
        s.push_str(&format!("{i} {j}\n"));
    }
    s
}

pub fn braid_word_from_text(text: &str) -> Result<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ls: Vec<u32> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad braid line {line:?}"))))
            .collect::<Result<_>>()?;
        if ls.len() != 2 || ls[0] == 0 || ls[1] == 0 || ls[0] == ls[1] {
            return Err(Error::Parse(format!("bad braid line {line:?}")));
        }
        out.push((ls[0], ls[1]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;

    fn set(n: u32, lines: &str) -> StabilizerSet {
        let gens = lines
            .split(';')
            .map(|l| l.trim().parse::<MajoranaMonomial>().unwrap())
            .collect();
        StabilizerSet::new(n, gens).unwrap()
    }

    #[test]
    fn braid_examples() {
        let s = StabilizerSet::vacuum(4).conjugate_by_braid(2, 3).unwrap();
        assert_eq!(s, set(4, "+i 1 3; -i 2 4"));
        let s = StabilizerSet::vacuum(2).conjugate_by_braid(1, 2).unwrap();
        assert_eq!(s, StabilizerSet::vacuum(2));
        let s = set(6, "-i 5 6").conjugate_by_braid(2, 3).unwrap();
        assert_eq!(s, set(6, "-i 5 6"));
    }

    #[test]
    fn double_braid_flips_signs() {
        let s = StabilizerSet::vacuum(4);
        let s2 = s.conjugate_by_braid(2, 3).unwrap().conjugate_by_braid(2, 3).unwrap();
        assert_eq!(s2, set(4, "+i 1 2; +i 3 4"));
    }

    #[test]
    fn sparse_to_dense_measurement() {
        let s = StabilizerSet::vacuum(8);
        let p = MajoranaMonomial::pair(4, 5);
        let (t, d) = s.measure_parity(&p, 1).unwrap();
        assert_eq!(d, Determinism::Random);
        assert!(t.generators().contains(&p));
        EncodingLayout::dense(3).check(&t).unwrap();
        // Still stabilizes both logical Z's and the total parity.
        assert_eq!(t.group_sign(&MajoranaMonomial::pair(1, 2)), Some(1));
        assert_eq!(t.group_sign(&MajoranaMonomial::pair(7, 8)), Some(1));
        assert_eq!(t.group_sign(&MajoranaMonomial::total_parity(8)), Some(1));
    }

    #[test]
    fn commuting_measurement_is_deterministic() {
        let s = StabilizerSet::vacuum(4);
        let p = MajoranaMonomial::pair(1, 2);
        assert_eq!(s.measure_parity(&p, 1).unwrap(), (s.clone(), Determinism::Deterministic));
        assert_eq!(
            s.measure_parity(&p, -1),
            Err(Error::ForcedOutcomeMismatch {
                forced: 1,
                requested: -1
            })
        );
        let q = MajoranaMonomial::quad(1, 2, 3, 4);
        assert_eq!(s.measure_parity(&q, 1).unwrap().1, Determinism::Deterministic);
    }

    #[test]
    fn sampled_measurement_is_seeded() {
        let s = StabilizerSet::vacuum(8);
        let p = MajoranaMonomial::pair(4, 5);
        let run = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| s.measure_parity_sampled(&p, &mut rng).unwrap().2)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert!(run(7).contains(&1) && run(7).contains(&-1));
    }

    #[test]
    fn readout_examples() {
        let layout = EncodingLayout::dense(1);
        let s = StabilizerSet::vacuum(4);
        let r = logical_readout(&s, &layout).unwrap();
        let txt: Vec<_> = r.iter().map(|p| p.to_string()).collect();
        assert_eq!(txt, ["+Z1", "+Z2"]);
        let s = s.conjugate_by_braid(2, 3).unwrap();
        let txt: Vec<_> = logical_readout(&s, &layout)
            .unwrap()
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(txt, ["+Y1 X2", "+X1 Y2"]);
        let frame = |w: &[(u32, u32)]| -> Vec<String> {
            let s = w.iter().fold(StabilizerSet::vacuum(4), |s, &(i, j)| {
                s.conjugate_by_braid(i, j).unwrap()
            });
            logical_readout(&s, &layout)
                .unwrap()
                .iter()
                .map(|p| p.to_string())
                .collect()
        };
        // B₃₄² = γ₃γ₄ commutes with the frame; B₂₃² flips both signs.
        assert_eq!(frame(&[(3, 4), (3, 4)]), ["+Z1", "+Z2"]);
        assert_eq!(frame(&[(2, 3), (2, 3)]), ["-Z1", "-Z2"]);
    }

    #[test]
    fn readout_rejects_leaked_state() {
        let s = StabilizerSet::vacuum(8).conjugate_by_braid(4, 5).unwrap();
        assert!(matches!(
            logical_readout(&s, &EncodingLayout::sparse(2)),
            Err(Error::NotInLogicalSubspace { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let s = StabilizerSet::vacuum(6).conjugate_by_braid(2, 5).unwrap();
        assert_eq!(StabilizerSet::from_text(&s.to_text()).unwrap(), s);
        let w = [(2, 3), (7, 1)];
        assert_eq!(braid_word_from_text(&braid_word_to_text(&w)).unwrap(), w);
        assert!(braid_word_from_text("3 3").is_err());
    }

    #[test]
    fn construction_validates() {
        assert!(StabilizerSet::new(4, vec![MajoranaMonomial::pair(1, 2), MajoranaMonomial::pair(2, 3)]).is_err());
        let q = MajoranaMonomial::quad(1, 2, 3, 4);
        assert!(StabilizerSet::new(4, vec![MajoranaMonomial::pair(1, 2), MajoranaMonomial::pair(3, 4), q]).is_err());
        assert!(StabilizerSet::new(4, vec![MajoranaMonomial::pair(1, 5)]).is_err());
    }

    fn arb_word(n: u32, len: usize) -> impl Strategy<Value = Vec<(u32, u32)>> {
        proptest::collection::vec((1..=n, 1..=n), 0..len)
            .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).collect())
    }

    fn apply(s: &StabilizerSet, w: &[(u32, u32)]) -> StabilizerSet {
        w.iter().fold(s.clone(), |s, &(i, j)| s.conjugate_by_braid(i, j).unwrap())
    }

    proptest! {
        #[test]
        fn braids_preserve_group_structure(w in arb_word(8, 30)) {
            let s = apply(&StabilizerSet::vacuum(8), &w);
            prop_assert!(StabilizerSet::new(8, s.generators().to_vec()).is_ok());
            prop_assert_eq!(s.group_sign(&MajoranaMonomial::total_parity(8)), Some(1));
            for g in s.generators() {
                prop_assert!((g * g).is_identity());
            }
        }

        #[test]
        fn artin_relations(i in 1u32..7, j in 1u32..7, w in arb_word(8, 10)) {
            let s = apply(&StabilizerSet::vacuum(8), &w);
            let b = |s: &StabilizerSet, k: u32| s.conjugate_by_braid(k, k + 1).unwrap();
            if i.abs_diff(j) > 1 {
                prop_assert_eq!(b(&b(&s, i), j), b(&b(&s, j), i));
            } else if i.abs_diff(j) == 1 {
                prop_assert_eq!(b(&b(&b(&s, i), j), i), b(&b(&b(&s, j), i), j));
            }
        }

        #[test]
        fn commuting_measurement_keeps_group(w in arb_word(8, 20), a in 1u32..=8, b in 1u32..=8) {
            prop_assume!(a != b);
            let s = apply(&StabilizerSet::vacuum(8), &w);
            let p = MajoranaMonomial::pair(a.min(b), a.max(b));
            if s.generators().iter().all(|g| g.commutes_with(&p)) {
                let sign = s.group_sign(&p).unwrap();
                prop_assert_eq!(s.measure_parity(&p, sign).unwrap(), (s.clone(), Determinism::Deterministic));
            } else {
                let (t, d) = s.measure_parity(&p, -1).unwrap();
                prop_assert_eq!(d, Determinism::Random);
                prop_assert_eq!(t.group_sign(&p), Some(-1));
                prop_assert!(StabilizerSet::new(8, t.generators().to_vec()).is_ok());
            }
        }
    }
}
