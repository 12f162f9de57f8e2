//! Protocol schedules and their transition matrices.
//!
//! A schedule is a list of braids, dwells and √2-scaled parity projections on
//! the Majorana labels of `n_qubits` sparse qubits. Four backends evaluate it:
//! ideal Majorana operators on Fock space, the stabilizer tracker, and a wire
//! device evaluated either through the Pfaffian overlap pipeline or by exact
//! many-body evolution.
//!
//! Device amplitudes are T_mn = ⟨m| P_K(t,t_K) ⋯ P_1(t,t_1) |n(t)⟩ with each
//! projector moved to the final time, P(t,t_a) = U(t,t_a) P U(t,t_a)†. Pair
//! projectors enter as d d† (or d†d), other parities as (1 + s·p)/2, so a
//! schedule with M pair/quad projection pairs sums 2^M operator strings.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bdg::BdGSystem;
use crate::device::Device;
use crate::error::{Error, Result};
use crate::evolution::{diagonalize, propagate, step_count, tau_x_conj, PropagateOptions, TracePoint, WavefunctionSet};
use crate::fock::{evolve_states, vacuum, FockSpace, LinearFermion, ManyBodyOperator};
use crate::linalg::{uniform, CMat, CVec, KahanSum, C64, I, ONE};
use crate::logical::{logical_bits, CliffordOp, LogicalTracker};
use crate::monomial::MajoranaMonomial;
use crate::overlap::{ContractionPool, OverlapFrames};

const SQRT2: f64 = core::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutcomePolicy {
    /// +1 selects the even projector (1 + p)/2.
    Forced(i8),
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Braid { i: u32, j: u32 },
    /// exp(angle·γ_iγ_j) from a calibrated hybridization dwell.
    Dwell { i: u32, j: u32, angle: f64 },
    ProjectPair { a: u32, b: u32, outcome: OutcomePolicy },
    ProjectQuad { qubit: u32, outcome: OutcomePolicy },
    Readout,
}

impl Event {
    /// Parity operator and policy of a projection event.
    pub fn projection(&self) -> Option<(MajoranaMonomial, OutcomePolicy)> {
        match *self {
            Event::ProjectPair { a, b, outcome } => Some((MajoranaMonomial::pair(a, b), outcome)),
            Event::ProjectQuad { qubit, outcome } => Some((quad_of(qubit), outcome)),
            _ => None,
        }
    }
}

fn quad_of(q: u32) -> MajoranaMonomial {
    MajoranaMonomial::quad(4 * q - 3, 4 * q - 2, 4 * q - 1, 4 * q)
}

/// Pair projector on labels (4i, 4j−3) and quad projector on qubit i.
pub fn generalized_projectors(i: u32, j: u32, n_qubits: u32) -> Result<(MajoranaMonomial, MajoranaMonomial)> {
    for q in [i, j] {
        if q == 0 || q > n_qubits {
            return Err(Error::QubitNotSparse { qubit: q as usize });
        }
    }
    if i == j {
        return Err(Error::InvalidSchedule(format!("qubit {i} cannot be paired with itself")));
    }
    Ok((MajoranaMonomial::pair(4 * i, 4 * j - 3), quad_of(i)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub n_qubits: u32,
    pub events: Vec<Event>,
}

impl Schedule {
    pub fn new(n_qubits: u32, events: Vec<Event>) -> Result<Self> {
        let s = Self { n_qubits, events };
        s.validate()?;
        Ok(s)
    }

    pub fn n_majoranas(&self) -> u32 {
        4 * self.n_qubits
    }

    /// Labels in range, and every quad projection closes an earlier pair
    /// projection touching that qubit.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_majoranas();
        let label = |k: usize, l: u32| {
            if l == 0 || l > n {
                Err(Error::InvalidSchedule(format!("event {k}: label {l} outside 1..={n}")))
            } else {
                Ok(())
            }
        };
        let mut open: Vec<(u32, u32)> = Vec::new();
        for (k, e) in self.events.iter().enumerate() {
            match *e {
                Event::Braid { i, j } | Event::Dwell { i, j, .. } => {
                    label(k, i)?;
                    label(k, j)?;
                    if i == j {
                        return Err(Error::InvalidSchedule(format!("event {k}: repeated label {i}")));
                    }
                }
                Event::ProjectPair { a, b, outcome } => {
                    label(k, a)?;
                    label(k, b)?;
                    if a == b {
                        return Err(Error::InvalidSchedule(format!("event {k}: repeated label {a}")));
                    }
                    check_outcome(k, outcome)?;
                    open.push((a, b));
                }
                Event::ProjectQuad { qubit, outcome } => {
                    if qubit == 0 || qubit > self.n_qubits {
                        return Err(Error::InvalidSchedule(format!(
                            "event {k}: qubit {qubit} outside 1..={}",
                            self.n_qubits
                        )));
                    }
                    check_outcome(k, outcome)?;
                    let on = |l: u32| l.div_ceil(4) == qubit;
                    match open.iter().position(|&(a, b)| on(a) || on(b)) {
                        Some(p) => {
                            open.remove(p);
                        }
                        None => {
                            return Err(Error::InvalidSchedule(format!(
                                "event {k}: quad projection on qubit {qubit} has no preceding pair projection"
                            )))
                        }
                    }
                }
                Event::Readout => {}
            }
        }
        Ok(())
    }

    pub fn projection_count(&self) -> usize {
        self.events.iter().filter(|e| e.projection().is_some()).count()
    }

    /// Operator strings per amplitude: product of per-projection term counts.
    pub fn branch_count(&self) -> usize {
        self.events
            .iter()
            .filter_map(|e| e.projection())
            .map(|(p, _)| if p.len() == 2 { 1 } else { 2 })
            .product()
    }

    /// Replaces projection policies, in event order, by forced outcomes.
    pub fn with_outcomes(&self, outcomes: &[i8]) -> Result<Self> {
        if outcomes.len() != self.projection_count() {
            return Err(Error::DimensionMismatch {
                expected: self.projection_count(),
                found: outcomes.len(),
            });
        }
        let mut it = outcomes.iter();
        let events = self
            .events
            .iter()
            .map(|e| match *e {
                Event::ProjectPair { a, b, .. } => Event::ProjectPair { a, b, outcome: OutcomePolicy::Forced(*it.next().unwrap()) },
                Event::ProjectQuad { qubit, .. } => Event::ProjectQuad { qubit, outcome: OutcomePolicy::Forced(*it.next().unwrap()) },
                ref other => other.clone(),
            })
            .collect();
        Self::new(self.n_qubits, events)
    }

    fn forced(&self) -> Result<Vec<(usize, MajoranaMonomial, i8)>> {
        self.events
            .iter()
            .enumerate()
            .filter_map(|(k, e)| e.projection().map(|(p, o)| (k, p, o)))
            .map(|(k, p, o)| match o {
                OutcomePolicy::Forced(s) => Ok((k, p, s)),
                OutcomePolicy::Sampled => Err(Error::InvalidSchedule(format!(
                    "event {k}: sampled outcome must be resolved before evaluation"
                ))),
            })
            .collect()
    }

    /// Clifford steps for the stabilizer tracker; dwells must be multiples of π/4.
    pub fn clifford_ops(&self) -> Result<Vec<CliffordOp>> {
        let mut ops = Vec::new();
        for (k, e) in self.events.iter().enumerate() {
            match *e {
                Event::Braid { i, j } => ops.push(CliffordOp::Braid(i, j)),
                Event::Dwell { i, j, angle } => {
                    let q = angle / core::f64::consts::FRAC_PI_4;
                    let r = libm::round(q);
                    if (q - r).abs() > 1e-12 {
                        return Err(Error::InvalidSchedule(format!("event {k}: dwell angle {angle} is not Clifford")));
                    }
                    ops.push(CliffordOp::QuarterTurns(i, j, r as i32));
                }
                Event::ProjectPair { .. } | Event::ProjectQuad { .. } => {
                    let (p, o) = e.projection().unwrap();
                    match o {
                        OutcomePolicy::Forced(s) => ops.push(CliffordOp::Project(p, s)),
                        OutcomePolicy::Sampled => {
                            return Err(Error::InvalidSchedule(format!("event {k}: unresolved sampled outcome")))
                        }
                    }
                }
                Event::Readout => {}
            }
        }
        Ok(ops)
    }
}

fn check_outcome(k: usize, o: OutcomePolicy) -> Result<()> {
    match o {
        OutcomePolicy::Forced(s) if s != 1 && s != -1 => {
            Err(Error::InvalidSchedule(format!("event {k}: outcome must be +1 or -1, got {s}")))
        }
        _ => Ok(()),
    }
}

/// Basis states as zero-mode occupations d_1 … d_{2N}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// Sparse logical states, qubit 1 fastest.
    Logical,
    /// Every zero-mode occupation.
    ZeroModes,
    /// Zero-mode occupations of the given total parity (false = even).
    ZeroModesParity(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub states: Vec<Vec<u8>>,
}

impl Basis {
    pub fn new(kind: BasisKind, n_qubits: u32) -> Self {
        let pairs = 2 * n_qubits as usize;
        let occ = |bits: u64| (0..pairs).map(|k| (bits >> k & 1) as u8).collect::<Vec<u8>>();
        let states = match kind {
            BasisKind::Logical => (0..1usize << n_qubits).map(|x| occ(logical_bits(x, n_qubits))).collect(),
            BasisKind::ZeroModes => (0..1u64 << pairs).map(occ).collect(),
            BasisKind::ZeroModesParity(odd) => (0..1u64 << pairs)
                .filter(|b| (b.count_ones() % 2 == 1) == odd)
                .map(occ)
                .collect(),
        };
        Self { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.states
            .iter()
            .map(|s| s.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect())
            .collect()
    }

    fn fock_index(&self, k: usize) -> usize {
        self.states[k].iter().enumerate().map(|(j, &b)| (b as usize) << j).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub labels: Vec<String>,
    pub entries: CMat,
}

/// |tr(target†T)|² / (d·tr(T†T)), clamped to [0, 1].
pub fn gate_fidelity(t: &TransitionMatrix, target: &CMat) -> Result<f64> {
    if t.entries.shape() != target.shape() {
        return Err(Error::DimensionMismatch {
            expected: target.nrows(),
            found: t.entries.nrows(),
        });
    }
    Ok(crate::logical::process_overlap(target, &t.entries))
}

/// Phase e^{iφ} minimizing ‖a − e^{iφ}b‖ and the remaining max entrywise
/// deviation.
pub fn align_global_phase(a: &CMat, b: &CMat) -> (C64, f64) {
    let ov = (b.adjoint() * a).trace();
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    let dev = (a - b * ph).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    (ph, dev)
}

fn ideal_operator(schedule: &Schedule, space: &FockSpace) -> Result<CMat> {
    let dim = space.dim();
    let mut op = CMat::identity(dim, dim);
    for (k, e) in schedule.events.iter().enumerate() {
        let step = match *e {
            Event::Braid { i, j } => space.braid(i, j)?,
            Event::Dwell { i, j, angle } => space.rotation(i, j, angle)?,
            Event::ProjectPair { .. } | Event::ProjectQuad { .. } => {
                let (p, o) = e.projection().unwrap();
                let s = match o {
                    OutcomePolicy::Forced(s) => s,
                    OutcomePolicy::Sampled => {
                        return Err(Error::InvalidSchedule(format!("event {k}: unresolved sampled outcome")))
                    }
                };
                ManyBodyOperator(space.projector(&p, s)?.0 * C64::from(SQRT2))
            }
            Event::Readout => continue,
        };
        op = step.0 * op;
    }
    Ok(op)
}

/// Transition matrix of ideal Majorana operators on the 4N-Majorana Fock space.
pub fn ideal_transition_matrix(schedule: &Schedule, basis: &Basis) -> Result<TransitionMatrix> {
    let space = FockSpace::new(schedule.n_majoranas())?;
    let op = ideal_operator(schedule, &space)?;
    let n = basis.len();
    let idx: Vec<usize> = (0..n).map(|k| basis.fock_index(k)).collect();
    let entries = CMat::from_fn(n, n, |r, c| op[(idx[r], idx[c])]);
    Ok(TransitionMatrix { labels: basis.labels(), entries })
}

/// Logical map predicted by the stabilizer tracker, up to global phase.
pub fn stabilizer_transition_matrix(schedule: &Schedule) -> Result<TransitionMatrix> {
    let mut tracker = LogicalTracker::sparse(schedule.n_qubits);
    for op in schedule.clifford_ops()? {
        tracker.apply(&op)?;
    }
    Ok(TransitionMatrix {
        labels: Basis::new(BasisKind::Logical, schedule.n_qubits).labels(),
        entries: tracker.predicted_unitary()?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledOutcomes {
    /// One outcome per projection event, in event order.
    pub outcomes: Vec<i8>,
    /// Born probability of each realized outcome.
    pub probabilities: Vec<f64>,
    pub resolved: Schedule,
}

/// Runs the ideal backend on logical basis state `input`, drawing sampled
/// outcomes from the Born rule with a seeded generator; forced outcomes keep
/// their value and report their probability.
pub fn sample_outcomes(schedule: &Schedule, input: usize, seed: u64) -> Result<SampledOutcomes> {
    let space = FockSpace::new(schedule.n_majoranas())?;
    let basis = Basis::new(BasisKind::Logical, schedule.n_qubits);
    if input >= basis.len() {
        return Err(Error::BasisOutsideZeroSector { state: input });
    }
    let mut psi = CVec::zeros(space.dim());
    psi[basis.fock_index(input)] = ONE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut outcomes, mut probabilities) = (Vec::new(), Vec::new());
    for (k, e) in schedule.events.iter().enumerate() {
        let step = match *e {
            Event::Braid { i, j } => space.braid(i, j)?,
            Event::Dwell { i, j, angle } => space.rotation(i, j, angle)?,
            Event::Readout => continue,
            _ => {
                let (p, o) = e.projection().unwrap();
                let plus = space.projector(&p, 1)?.0 * &psi;
                let p_plus = plus.norm_squared();
                let s = match o {
                    OutcomePolicy::Forced(s) => s,
                    OutcomePolicy::Sampled => {
                        if uniform(&mut rng) < p_plus {
                            1
                        } else {
                            -1
                        }
                    }
                };
                let prob = if s == 1 { p_plus } else { 1.0 - p_plus };
                if prob < 1e-12 {
                    return Err(Error::ZeroProbabilityOutcome { event: k });
                }
                outcomes.push(s);
                probabilities.push(prob);
                psi = space.projector(&p, s)?.0 * &psi;
                psi.unscale_mut(libm::sqrt(prob));
                continue;
            }
        };
        psi = step.0 * psi;
    }
    let resolved = schedule.with_outcomes(&outcomes)?;
    Ok(SampledOutcomes { outcomes, probabilities, resolved })
}

/// A schedule laid out on a device: μ schedule plus projection times.
#[derive(Clone, Debug)]
pub struct CompiledRun {
    pub system: BdGSystem,
    pub n_zero_pairs: usize,
    /// (time, parity, outcome) per projection, in time order.
    pub projections: Vec<(f64, MajoranaMonomial, i8)>,
    /// Start and end time of every event.
    pub event_spans: Vec<(f64, f64)>,
    pub t_total: f64,
    pub localizer: crate::evolution::Localizer,
}

/// Compiles braids into keyboard moves and dwells into calibrated holds;
/// `dt` sets the calibration scan step.
pub fn compile(schedule: &Schedule, device: &Device, dt: f64) -> Result<CompiledRun> {
    if device.n_majoranas() != schedule.n_majoranas() {
        return Err(Error::DimensionMismatch {
            expected: schedule.n_majoranas() as usize,
            found: device.n_majoranas() as usize,
        });
    }
    let forced = schedule.forced()?;
    let mut prog = device.program();
    let mut projections = Vec::new();
    let mut spans = Vec::new();
    let mut next = forced.iter().peekable();
    for (k, e) in schedule.events.iter().enumerate() {
        let t0 = prog.now();
        match *e {
            Event::Braid { i, j } => prog.braid(i, j)?,
            Event::Dwell { i, j, angle } => {
                let hold = device.calibrate_dwell(i, j, angle, dt)?;
                prog.dwell(i, j, hold)?;
            }
            Event::ProjectPair { .. } | Event::ProjectQuad { .. } => {
                let (_, p, s) = next.next().filter(|f| f.0 == k).cloned().ok_or(Error::InvalidSchedule(format!(
                    "event {k}: projection bookkeeping mismatch"
                )))?;
                projections.push((t0, p, s));
            }
            Event::Readout => {}
        }
        spans.push((t0, prog.now()));
    }
    let t_total = prog.now();
    let system = device.system(prog.finish())?;
    Ok(CompiledRun {
        system,
        n_zero_pairs: device.n_majoranas() as usize / 2,
        projections,
        event_spans: spans,
        t_total,
        localizer: device.localizer(),
    })
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub max_unitarity_residual: f64,
    pub branch_count: usize,
    pub trace: Vec<TracePoint>,
    pub n_empty: usize,
    pub n_paired: usize,
    pub n_occupied: usize,
}

/// One additive term of a projector: coefficient times an operator string.
type Term = (C64, Vec<CVec>);

/// Propagated frames and projector terms, ready for independent amplitude
/// evaluations.
#[derive(Clone, Debug)]
pub struct PreparedPfaffian {
    pub frames: OverlapFrames,
    /// Per projection, in time order.
    pub terms: Vec<Vec<Term>>,
    pub n_zero_pairs: usize,
    pub diagnostics: Diagnostics,
    /// Every term operator, contracted once against the builders.
    pool: ContractionPool,
    /// Pool index of the first operator of `terms[p][k]`.
    offsets: Vec<Vec<usize>>,
}

fn majorana_strings(p: &MajoranaMonomial, s: i8, gamma: &dyn Fn(u32) -> Result<CVec>) -> Result<Vec<Term>> {
    let labels = p.indices();
    if labels.len() == 2 {
        // p = ph·γ_aγ_b = (i·ph)·(−iγ_aγ_b); even branch of −iγ_aγ_b is d d†.
        let eff = p.phase().to_c64() * I * C64::from(s as f64);
        let d = (gamma(labels[0])? - gamma(labels[1])? * I) * C64::from(0.5);
        let dd = tau_x_conj(&d);
        let ops = if eff.re > 0.0 { vec![d, dd] } else { vec![dd, d] };
        return Ok(vec![(C64::from(SQRT2), ops)]);
    }
    let ops = labels.iter().map(|&l| gamma(l)).collect::<Result<Vec<_>>>()?;
    let half = C64::from(SQRT2 / 2.0);
    Ok(vec![(half, Vec::new()), (half * p.phase().to_c64() * C64::from(s as f64), ops)])
}

pub fn prepare_pfaffian(run: &CompiledRun, opts: &PropagateOptions) -> Result<PreparedPfaffian> {
    let sys = &run.system;
    let ws0 = diagonalize(&sys.assemble(0.0)?, run.n_zero_pairs, &run.localizer, 0.0)?;
    let m = sys.n_sites();
    let mut trace = Vec::new();
    let mut s = CMat::identity(2 * m, 2 * m);
    let mut t = 0.0;
    let mut at_projection = Vec::new();
    for (tp, _, _) in &run.projections {
        s = propagate(sys, &s, t, *tp, opts, &mut trace)?;
        t = *tp;
        at_projection.push(s.clone());
    }
    s = propagate(sys, &s, t, run.t_total, opts, &mut trace)?;
    let mut terms = Vec::new();
    for ((_, p, sign), sa) in run.projections.iter().zip(&at_projection) {
        let r = &s * sa.adjoint();
        let gamma = |l: u32| -> Result<CVec> { Ok(&r * ws0.majorana(l)?) };
        terms.push(majorana_strings(p, *sign, &gamma)?);
    }
    let evolved = ws0.evolved(&s, run.t_total);
    let frames = OverlapFrames::new(ws0, evolved)?;
    let mut ops: Vec<CVec> = Vec::new();
    let offsets: Vec<Vec<usize>> = terms
        .iter()
        .map(|t| {
            t.iter()
                .map(|(_, o)| {
                    ops.extend(o.iter().cloned());
                    ops.len() - o.len()
                })
                .collect()
        })
        .collect();
    let pool = frames.contraction_pool(&ops)?;
    let bm = &frames.vacuum.bm;
    let diagnostics = Diagnostics {
        max_unitarity_residual: trace
            .iter()
            .map(|p| p.unitarity_residual)
            .fold(crate::linalg::unitarity_residual(&s), f64::max),
        branch_count: terms.iter().map(|t| t.len()).product(),
        n_empty: bm.n_empty,
        n_paired: bm.pairs.len(),
        n_occupied: bm.n_occupied,
        trace,
    };
    Ok(PreparedPfaffian {
        frames,
        terms,
        n_zero_pairs: run.n_zero_pairs,
        diagnostics,
        pool,
        offsets,
    })
}

impl PreparedPfaffian {
    pub fn branch_count(&self) -> usize {
        self.terms.iter().map(|t| t.len()).product()
    }

    fn occupation(&self, zero_modes: &[u8], k: usize) -> Result<Vec<u8>> {
        if zero_modes.len() != self.n_zero_pairs {
            return Err(Error::BasisOutsideZeroSector { state: k });
        }
        let mut occ = vec![0u8; self.frames.n_modes()];
        occ[..zero_modes.len()].copy_from_slice(zero_modes);
        Ok(occ)
    }

    /// Σ over branches (little-endian over projections) of the Pfaffian
    /// amplitudes, Kahan-summed.
    pub fn amplitude(&self, basis: &Basis, row: usize, col: usize) -> Result<C64> {
        let m = self.occupation(&basis.states[row], row)?;
        let n = self.occupation(&basis.states[col], col)?;
        let table = self.frames.bind_pool(&self.pool, &m, &n)?;
        let mut acc = KahanSum::new();
        let mut string: Vec<usize> = Vec::new();
        let mut picks = Vec::with_capacity(self.terms.len());
        for b in 0..self.branch_count() {
            let mut coef = ONE;
            string.clear();
            picks.clear();
            let mut rest = b;
            for t in &self.terms {
                picks.push(rest % t.len());
                rest /= t.len();
            }
            // Latest projection acts last, so it stands leftmost.
            for ((t, &k), off) in self.terms.iter().zip(&picks).zip(&self.offsets).rev() {
                coef *= t[k].0;
                string.extend(off[k]..off[k] + t[k].1.len());
            }
            acc.add(coef * self.frames.pooled_expectation(&table, &string)?);
        }
        Ok(acc.value())
    }

    pub fn transition_matrix(&self, basis: &Basis) -> Result<TransitionMatrix> {
        let n = basis.len();
        let mut entries = CMat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                entries[(r, c)] = self.amplitude(basis, r, c)?;
            }
        }
        Ok(TransitionMatrix { labels: basis.labels(), entries })
    }
}

/// Uniform grid used by `propagate` between two times.
pub fn time_grid(t_from: f64, t_to: f64, dt: f64) -> Vec<f64> {
    let steps = step_count(t_from, t_to, dt);
    let h = (t_to - t_from) / steps.max(1) as f64;
    let mut g: Vec<f64> = (0..steps).map(|k| t_from + k as f64 * h).collect();
    g.push(t_to);
    g
}

/// Exact many-body evaluation of a compiled run (≤ 12 sites).
pub fn exact_device_transition(run: &CompiledRun, basis: &Basis, opts: &PropagateOptions) -> Result<TransitionMatrix> {
    let sys = &run.system;
    let m = sys.n_sites();
    let space = FockSpace::with_modes(m as u32)?;
    let ws0: WavefunctionSet = diagonalize(&sys.assemble(0.0)?, run.n_zero_pairs, &run.localizer, 0.0)?;
    let ds: Vec<LinearFermion> = (0..m)
        .map(|k| LinearFermion::from_nambu(&ws0.psi.column(k).into_owned()))
        .collect();
    let vac = vacuum(&space, &ds)?;
    let state = |zero_modes: &[u8]| {
        let mut v = vac.clone();
        for (k, _) in zero_modes.iter().enumerate().filter(|(_, &b)| b == 1).rev() {
            v = ds[k].adjoint().apply(&v);
        }
        v
    };
    let gammas: Vec<LinearFermion> = (1..=2 * run.n_zero_pairs as u32)
        .map(|l| ws0.majorana(l).map(|w| LinearFermion::from_nambu(&w)))
        .collect::<Result<_>>()?;
    let path = |t: f64| sys.assemble(t);
    let kets: Vec<CVec> = basis.states.iter().map(|s| state(s)).collect();
    let mut vs = kets.clone();
    let mut t = 0.0;
    for (tp, p, s) in &run.projections {
        evolve_states(&space, path, &time_grid(t, *tp, opts.dt), &mut vs)?;
        t = *tp;
        for v in vs.iter_mut() {
            let mut pv = v.clone();
            for &l in p.indices().iter().rev() {
                pv = gammas[l as usize - 1].apply(&pv);
            }
            *v = (&*v + pv * (p.phase().to_c64() * C64::from(*s as f64))) * C64::from(SQRT2 / 2.0);
        }
    }
    evolve_states(&space, path, &time_grid(t, run.t_total, opts.dt), &mut vs)?;
    let entries = CMat::from_fn(basis.len(), basis.len(), |r, c| kets[r].dotc(&vs[c]));
    Ok(TransitionMatrix { labels: basis.labels(), entries })
}

/// Convenience serial Pfaffian run.
pub fn run(schedule: &Schedule, device: &Device, basis: &Basis, opts: &PropagateOptions) -> Result<(TransitionMatrix, Diagnostics)> {
    let compiled = compile(schedule, device, opts.dt)?;
    let prepared = prepare_pfaffian(&compiled, opts)?;
    let t = prepared.transition_matrix(basis)?;
    Ok((t, prepared.diagnostics))
}
