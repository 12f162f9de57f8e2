//! Acceptance suite: one PASS/FAIL line per criterion at pinned tolerances.
//!
//! `ACCEPTANCE_ONLY=3,7` restricts the run to the listed criteria.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use majorana_core::bdg::random_bdg;
use majorana_core::bloch_messiah::bloch_messiah;
use majorana_core::device::{CellSpec, Device, DeviceParams};
use majorana_core::evolution::{bogoliubov_xy, diagonalize, Localizer, PropagateOptions};
use majorana_core::fock::FockSpace;
use majorana_core::linalg::{expm_hermitian, random_complex, uniform};
use majorana_core::logical::{cnot, logical_bits, DENSE_CNOT_WORD};
use majorana_core::pfaffian::{log_pfaffian, pfaffian_brute_force, SkewMatrix};
use majorana_core::protocol::{
    align_global_phase, compile, exact_device_transition, gate_fidelity, ideal_transition_matrix, prepare_pfaffian,
    run, stabilizer_transition_matrix, Basis, BasisKind, Event, OutcomePolicy, Schedule, TransitionMatrix,
};
use majorana_core::stabilizer::{EncodingLayout, StabilizerSet};
use majorana_core::{CMat, Error, MajoranaMonomial, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

type Criterion = (usize, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "Pfaffian kernel", pfaffian_kernel),
    (2, "Bloch–Messiah decomposition", bloch_messiah_residuals),
    (3, "Pfaffian pipeline matches the exact oracle", oracle_equivalence),
    (4, "stabilizer consistency", stabilizer_consistency),
    (5, "projector identities", projector_identities),
    (6, "adiabatic sqrt_X braid", adiabatic_braid),
    (7, "CNOT via encoding swap", cnot_encoding_swap),
    (8, "branch scaling law", scaling_law),
    (9, "sparse braids do not entangle", no_entanglement),
    (10, "second-order convergence in dt", convergence),
];

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (k, name, check) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&k)) {
            continue;
        }
        let t0 = Instant::now();
        let v = check();
        let secs = t0.elapsed().as_secs_f64();
        println!("{} {k:>2} {name}: {} [{secs:.1} s]", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

// 1. pf(A)² = det(A) for n ∈ {2, …, 200}; brute force for n ≤ 8.
fn pfaffian_kernel() -> Verdict {
    let t0 = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut worst_brute = 0.0f64;
    let mut odd_nonzero = 0;
    for k in 0..200usize {
        let n = 2 + k % 199;
        let a = random_complex(&mut r, n, n) * C64::from(1.0 / (n as f64).sqrt());
        let s = SkewMatrix::from_upper(&a);
        let lp = log_pfaffian(&s);
        if n % 2 == 1 {
            odd_nonzero += usize::from(!lp.is_zero());
            continue;
        }
        let det = s.matrix().clone().determinant();
        let rel = (lp.phase * lp.phase * (2.0 * lp.log_abs - det.norm().ln()).exp() - det / det.norm()).norm();
        worst = worst.max(rel);
        if n <= 8 {
            let b = pfaffian_brute_force(s.matrix());
            worst_brute = worst_brute.max((lp.value() - b).norm() / b.norm().max(1e-300));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst < 1e-8 && worst_brute < 1e-12 && odd_nonzero == 0 && secs < 10.0;
    verdict(
        pass,
        format!("max |pf²−det|/|det| = {worst:.1e}, brute-force rel dev (n ≤ 8) = {worst_brute:.1e}, odd n nonzero = {odd_nonzero}, {secs:.1} s < 10 s"),
    )
}

// 2. Reconstruction and pair normalization for 100 random quenches, M ≤ 64.
fn bloch_messiah_residuals() -> Verdict {
    let mut r = rng(2);
    let mut recon = 0.0f64;
    let mut norm = 0.0f64;
    let mut errors = 0;
    let mut paired = 0;
    for k in 0..100usize {
        let m = 2 + (k * 37) % 63;
        let t = 0.05 + 2.0 * uniform(&mut r);
        let a = diagonalize(&random_bdg(&mut r, m), 0, &Localizer::Position, 0.0).unwrap();
        let s = expm_hermitian(&random_bdg(&mut r, m), t);
        let xy = bogoliubov_xy(&a, &a.evolved(&s, t)).unwrap();
        match bloch_messiah(&xy) {
            Ok(bm) => {
                let dd = bm.d.adjoint();
                let rx = (&xy.x - &bm.c * bm.x_bar() * &dd).norm();
                let ry = (&xy.y - bm.c.conjugate() * bm.y_bar() * &dd).norm();
                recon = recon.max(rx).max(ry);
                norm = norm.max(bm.pair_norm_residual());
                paired += bm.pairs.len();
            }
            Err(_) => errors += 1,
        }
    }
    let pass = errors == 0 && recon < 1e-9 && norm < 1e-10;
    verdict(
        pass,
        format!("max ‖X−CX̄D†‖,‖Y−C*ȲD†‖ = {recon:.1e} < 1e-9, max |x²+y²−1| = {norm:.1e} < 1e-10, {paired} pairs, {errors} failures"),
    )
}

fn small_params() -> DeviceParams {
    DeviceParams { arm_len: 3, seg_len: 1, wire_len: 2, move_time: 6.0, ..DeviceParams::default() }
}

fn pair(a: u32, b: u32, o: i8) -> Event {
    Event::ProjectPair { a, b, outcome: OutcomePolicy::Forced(o) }
}

fn quad(q: u32, o: i8) -> Event {
    Event::ProjectQuad { qubit: q, outcome: OutcomePolicy::Forced(o) }
}

// 3. Pfaffian pipeline against exact many-body evolution on ≤ 12 sites.
fn oracle_equivalence() -> Verdict {
    let t0 = Instant::now();
    let one = Device::new(small_params(), &[CellSpec::wire(1, 4), CellSpec::junction(2, 3)]).unwrap();
    let wires = DeviceParams { wire_len: 3, dwell_len: 1, move_time: 4.0, ..small_params() };
    let two = Device::new(
        wires,
        &[CellSpec::wire(1, 2), CellSpec::wire(3, 4), CellSpec::wire(5, 6), CellSpec::wire(7, 8)],
    )
    .unwrap();
    let braid = Event::Braid { i: 2, j: 3 };
    let cases: Vec<(&str, &Device, Schedule, BasisKind)> = vec![
        ("braid", &one, Schedule::new(1, vec![braid.clone()]).unwrap(), BasisKind::ZeroModes),
        ("pair+braid", &one, Schedule::new(1, vec![pair(1, 4, 1), braid.clone()]).unwrap(), BasisKind::ZeroModes),
        (
            "pair+braid+quad",
            &one,
            Schedule::new(1, vec![pair(1, 4, 1), braid, quad(1, -1)]).unwrap(),
            BasisKind::ZeroModes,
        ),
        (
            "2q pair+dwell+quad",
            &two,
            Schedule::new(2, vec![pair(4, 5, 1), Event::Dwell { i: 1, j: 2, angle: PI / 8.0 }, quad(1, 1)]).unwrap(),
            BasisKind::Logical,
        ),
    ];
    let opts = PropagateOptions { dt: 0.1, ..PropagateOptions::default() };
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, dev, sched, kind) in cases {
        assert!(dev.n_sites() <= 12);
        let basis = Basis::new(kind, sched.n_qubits);
        let compiled = compile(&sched, dev, opts.dt).unwrap();
        let pf = prepare_pfaffian(&compiled, &opts).unwrap().transition_matrix(&basis).unwrap();
        let ex = exact_device_transition(&compiled, &basis, &opts).unwrap();
        let (_, dev_) = align_global_phase(&pf.entries, &ex.entries);
        worst = worst.max(dev_);
        parts.push(format!("{name} ({} proj) {dev_:.1e}", sched.projection_count()));
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        worst < 1e-6 && secs < 300.0,
        format!("max |ΔT| = {worst:.1e} < 1e-6 [{}], {secs:.0} s < 300 s", parts.join("; ")),
    )
}

/// A random braid pair among `n` labels.
fn random_pair(r: &mut ChaCha8Rng, n: u32) -> (u32, u32) {
    let i = r.random_range(1..=n);
    let mut j = r.random_range(1..n);
    if j >= i {
        j += 1;
    }
    (i, j)
}

fn outcome(r: &mut ChaCha8Rng) -> i8 {
    if r.random_bool(0.5) {
        1
    } else {
        -1
    }
}

// 4. 500 random Clifford schedules: exact oracle equals the tracker's map.
fn stabilizer_consistency() -> Verdict {
    let mut r = rng(4);
    let mut checked = 0;
    let mut rejected = 0;
    let mut worst = 0.0f64;
    let mut failures = 0;
    while checked < 500 {
        let nq = r.random_range(1..=3u32);
        let n = 4 * nq;
        let mut events = Vec::new();
        let braids = |r: &mut ChaCha8Rng, events: &mut Vec<Event>| {
            for _ in 0..r.random_range(0..4) {
                let (i, j) = random_pair(r, n);
                events.push(Event::Braid { i, j });
            }
        };
        braids(&mut r, &mut events);
        if nq >= 2 && r.random_bool(0.7) {
            let q = r.random_range(1..nq);
            events.push(pair(4 * q, 4 * q + 1, outcome(&mut r)));
            braids(&mut r, &mut events);
            events.push(quad(q, outcome(&mut r)));
            braids(&mut r, &mut events);
        }
        let Ok(sched) = Schedule::new(nq, events) else {
            rejected += 1;
            continue;
        };
        let tracked = match stabilizer_transition_matrix(&sched) {
            Ok(t) => t,
            Err(Error::NotInLogicalSubspace { .. } | Error::LogicalMeasurement(_) | Error::ForcedOutcomeMismatch { .. }) => {
                rejected += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let exact = ideal_transition_matrix(&sched, &Basis::new(BasisKind::Logical, nq)).unwrap();
        let (_, d) = align_global_phase(&exact.entries, &tracked.entries);
        worst = worst.max(d);
        failures += usize::from(d >= 1e-10);
        checked += 1;
    }
    verdict(
        failures == 0,
        format!("{checked} schedules, max deviation {worst:.1e} < 1e-10, {failures} mismatches ({rejected} leaving the logical frame skipped)"),
    )
}

fn logical_state(space: &FockSpace, x: usize) -> majorana_core::linalg::CVec {
    let bits = logical_bits(x, 2);
    let occ: Vec<u8> = (0..4).map(|k| (bits >> k & 1) as u8).collect();
    space.basis_state(&occ)
}

// 5. Projector identities on the 8-Majorana oracle.
fn projector_identities() -> Verdict {
    let space = FockSpace::new(8).unwrap();
    let p45 = MajoranaMonomial::pair(4, 5);
    let q1 = MajoranaMonomial::quad(1, 2, 3, 4);
    let even = space.projector(&p45, 1).unwrap();
    let odd = space.projector(&p45, -1).unwrap();
    let closing = space.projector(&q1, 1).unwrap();
    let annihilate = max_abs(even.mul(&odd).matrix());
    let idempotent = [&even, &odd, &closing]
        .iter()
        .map(|p| max_abs(&(p.mul(p).matrix() - p.matrix())))
        .fold(0.0, f64::max);
    let mut logical = CMat::zeros(16, 16);
    let mut fair = 0.0f64;
    for x in 0..4 {
        let v = logical_state(&space, x);
        logical += &v * v.adjoint();
        let pe = (even.matrix() * &v).norm_squared();
        let po = (odd.matrix() * &v).norm_squared();
        fair = fair.max((pe - 0.5).abs()).max((pe - po).abs());
    }
    let swap = max_abs(&(closing.mul(&even).matrix() * &logical - &logical * C64::from(0.5)));
    let worst = annihilate.max(idempotent).max(swap).max(fair);
    verdict(
        worst < 1e-14,
        format!(
            "|Π⁻Π⁺| = {annihilate:.0e}, |Π²−Π| = {idempotent:.0e}, |Π₁₂₃₄Π₄₅P_L − P_L/2| = {swap:.0e}, max |P(even)−1/2| = {fair:.0e}"
        ),
    )
}

// 6. T-junction sqrt_X braid: ramp-time sweep.
fn adiabatic_braid() -> Verdict {
    let t0 = Instant::now();
    let sched = Schedule::new(1, vec![Event::Braid { i: 2, j: 3 }]).unwrap();
    let basis = Basis::new(BasisKind::Logical, 1);
    let ideal = ideal_transition_matrix(&sched, &basis).unwrap();
    let opts = PropagateOptions { dt: 0.05, ..PropagateOptions::default() };
    let mut fids = Vec::new();
    let mut unitarity = 0.0f64;
    let mut sites = 0;
    for tau in [2.0, 4.0, 8.0, 16.0] {
        let dev = Device::sparse_qubit(DeviceParams { move_time: tau, ..DeviceParams::default() }).unwrap();
        sites = dev.n_sites();
        let (t, d) = run(&sched, &dev, &basis, &opts).unwrap();
        fids.push(gate_fidelity(&t, &ideal.entries).unwrap());
        unitarity = unitarity.max(d.max_unitarity_residual);
    }
    let secs = t0.elapsed().as_secs_f64();
    let monotone = fids.windows(2).all(|w| w[1] > w[0]);
    let slowest = *fids.last().unwrap();
    let shown: Vec<String> = fids.iter().map(|f| format!("{f:.6}")).collect();
    verdict(
        monotone && slowest >= 0.99 && unitarity < 1e-8 && secs < 900.0,
        format!(
            "{sites} sites, move_time 2/4/8/16 → F = {}, monotone = {monotone}, unitarity residual {unitarity:.1e} < 1e-8, {secs:.0} s < 900 s",
            shown.join(", ")
        ),
    )
}

fn cnot_schedule() -> Schedule {
    let mut ev = vec![pair(4, 5, 1)];
    ev.extend(DENSE_CNOT_WORD.iter().map(|&(i, j)| Event::Braid { i, j }));
    ev.push(quad(1, 1));
    Schedule::new(2, ev).unwrap()
}

// 7. CNOT from the dense braid word between forced-even projections.
fn cnot_encoding_swap() -> Verdict {
    let sched = cnot_schedule();
    let basis = Basis::new(BasisKind::Logical, 2);
    let target = cnot(0, 1, 2);
    let ideal = gate_fidelity(&ideal_transition_matrix(&sched, &basis).unwrap(), &target).unwrap();
    let params = DeviceParams { arm_len: 8, seg_len: 2, wire_len: 4, move_time: 6.0, ..DeviceParams::default() };
    let dev = Device::for_braids(params, 8, &DENSE_CNOT_WORD).unwrap();
    let opts = PropagateOptions { dt: 0.05, ..PropagateOptions::default() };
    let (t, d) = run(&sched, &dev, &basis, &opts).unwrap();
    let f = gate_fidelity(&t, &target).unwrap();
    verdict(
        f >= 0.95 && 1.0 - ideal < 1e-10,
        format!(
            "{} sites, move_time 6: F = {f:.6} ≥ 0.95, ideal 1−F = {:.1e} < 1e-10, {} branches, unitarity {:.1e}",
            dev.n_sites(),
            1.0 - ideal,
            d.branch_count,
            d.max_unitarity_residual
        ),
    )
}

// 8. Wall time per amplitude against the number of projection pairs.
fn scaling_law() -> Verdict {
    // A fast dwell quenches most of a long wire and leaves a large paired
    // block, so the branch Pfaffians are dominated by the common vacuum part
    // rather than the projector strings.
    let params = DeviceParams { wire_len: 60, dwell_len: 2, move_time: 0.05, ..DeviceParams::default() };
    let dev = Device::new(
        params,
        &[CellSpec::wire(1, 2), CellSpec::wire(3, 4), CellSpec::wire(5, 6), CellSpec::wire(7, 8)],
    )
    .unwrap();
    let opts = PropagateOptions { dt: 0.05, ..PropagateOptions::default() };
    let basis = Basis::new(BasisKind::Logical, 2);
    let n = basis.len();
    let mut times = Vec::new();
    let mut paired = 0;
    let mut branches_ok = true;
    for m in 1..=4 {
        let mut ev = vec![Event::Dwell { i: 1, j: 2, angle: 0.3 }];
        for _ in 0..m {
            ev.push(pair(4, 5, 1));
            ev.push(quad(1, 1));
        }
        let sched = Schedule::new(2, ev).unwrap();
        let prepared = prepare_pfaffian(&compile(&sched, &dev, opts.dt).unwrap(), &opts).unwrap();
        branches_ok &= prepared.branch_count() == 1 << m;
        paired = prepared.diagnostics.n_paired;
        let mut best = Duration::MAX;
        for _ in 0..5 {
            let t0 = Instant::now();
            for r in 0..n {
                for c in 0..n {
                    prepared.amplitude(&basis, r, c).unwrap();
                }
            }
            best = best.min(t0.elapsed() / (n * n) as u32);
        }
        times.push(best.as_secs_f64());
    }
    // Least-squares slope of log₂ t against M.
    let logs: Vec<f64> = times.iter().map(|t| t.log2()).collect();
    let mean_m = 2.5;
    let mean_l = logs.iter().sum::<f64>() / 4.0;
    let slope = (0..4).map(|k| (k as f64 + 1.0 - mean_m) * (logs[k] - mean_l)).sum::<f64>() / 5.0;
    let factor = slope.exp2();
    let ratios: Vec<String> = times.windows(2).map(|w| format!("{:.2}", w[1] / w[0])).collect();
    let shown: Vec<String> = times.iter().map(|t| format!("{:.2} ms", t * 1e3)).collect();
    verdict(
        branches_ok && (factor - 2.0).abs() <= 0.3,
        format!(
            "{} sites, {paired} paired modes, 2^M branches = {branches_ok}, per amplitude M=1..4: {} → fitted growth {factor:.2} (2.0 ± 0.3), steps {}",
            dev.n_sites(),
            shown.join(", "),
            ratios.join(", ")
        ),
    )
}

/// True iff the group generated by `gens` is generated by its elements
/// supported on labels 1–4 and on labels 5–8.
fn factorizes(gens: &[MajoranaMonomial]) -> bool {
    let n = gens.len();
    let (mut a, mut b) = (0usize, 0usize);
    for mask in 0..1usize << n {
        let g = (0..n)
            .filter(|k| mask >> k & 1 == 1)
            .fold(MajoranaMonomial::identity(), |acc, k| acc * gens[k].clone());
        a += usize::from(g.indices().iter().all(|&l| l <= 4));
        b += usize::from(g.indices().iter().all(|&l| l > 4));
    }
    a * b == 1 << n
}

/// Operator Schmidt rank one, directly or after a qubit swap.
fn local_up_to_swap(u: &CMat) -> bool {
    let realign = |u: &CMat| {
        CMat::from_fn(4, 4, |r, c| {
            let (i1, j1, i2, j2) = (r & 1, r >> 1, c & 1, c >> 1);
            u[(i1 | i2 << 1, j1 | j2 << 1)]
        })
    };
    let swap = CMat::from_fn(4, 4, |r, c| C64::from(f64::from(u8::from(r == ((c & 1) << 1 | c >> 1)))));
    [realign(u), realign(&(&swap * u))].iter().any(|m| {
        let sv = m.singular_values();
        sv.iter().filter(|&&s| s > 1e-9).count() == 1
    })
}

// 9. Random sparse braid words never entangle the two qubits.
fn no_entanglement() -> Verdict {
    let mut r = rng(9);
    let layout = EncodingLayout::sparse(2);
    let basis = Basis::new(BasisKind::Logical, 2);
    let mut logical = 0;
    let mut counter = 0;
    for _ in 0..1000 {
        let len = r.random_range(1..=10);
        let word: Vec<(u32, u32)> = (0..len).map(|_| random_pair(&mut r, 8)).collect();
        let mut s = StabilizerSet::vacuum(8);
        for &(i, j) in &word {
            s = s.conjugate_by_braid(i, j).unwrap();
        }
        if layout.check(&s).is_err() {
            continue;
        }
        logical += 1;
        let sched = Schedule::new(2, word.iter().map(|&(i, j)| Event::Braid { i, j }).collect()).unwrap();
        let u: TransitionMatrix = ideal_transition_matrix(&sched, &basis).unwrap();
        let unitary = (u.entries.adjoint() * &u.entries - CMat::identity(4, 4)).norm() < 1e-10;
        if !(factorizes(s.generators()) && (!unitary || local_up_to_swap(&u.entries))) {
            counter += 1;
        }
    }
    verdict(
        counter == 0 && logical > 0,
        format!("1000 words, {logical} stay in the logical frame, {counter} counterexamples"),
    )
}

// 10. Halving dt cuts the amplitude error by four.
fn convergence() -> Verdict {
    let dev = Device::new(small_params(), &[CellSpec::wire(1, 4), CellSpec::junction(2, 3)]).unwrap();
    let sched = Schedule::new(1, vec![pair(1, 4, 1), Event::Braid { i: 2, j: 3 }]).unwrap();
    let basis = Basis::new(BasisKind::ZeroModes, 1);
    let ts: Vec<CMat> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&dt| {
            let opts = PropagateOptions { dt, ..PropagateOptions::default() };
            run(&sched, &dev, &basis, &opts).unwrap().0.entries
        })
        .collect();
    let e1 = max_abs(&(&ts[0] - &ts[1]));
    let e2 = max_abs(&(&ts[1] - &ts[2]));
    let ratio = e1 / e2;
    verdict(
        (ratio - 4.0).abs() <= 1.0,
        format!("max |T(dt)−T(dt/2)| at dt = 0.2, 0.1: {e1:.2e}, {e2:.2e}, ratio {ratio:.2} (4 ± 1)"),
    )
}
