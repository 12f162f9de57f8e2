//! Time-dependent BdG propagation and Bogoliubov transformations between
//! quasiparticle frames.
//!
//! An operator a = w†Φ is identified with its Nambu vector w. Quasiparticle
//! annihilators are the first M columns ψ_k of a frame; their adjoints are the
//! partner columns τ_xψ_k*. A Majorana γ is a self-conjugate vector
//! (τ_xw* = w) with w†w = 2, and zero-mode pairs give d_k = (γ_{2k−1} + iγ_{2k})/2.
//! Frames evolve as ψ_k(t, t₀) = S(t, t₀)ψ_k, matching U a U† for the
//! many-body propagator U.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::bdg::BdGSystem;
use crate::error::{Error, Result};
use crate::linalg::{eigh, max_abs, unitarity_residual, CMat, CVec, C64, I};

pub const UNITARITY_TOL: f64 = 1e-9;

/// How the degenerate zero-mode subspace is split into Majorana labels.
#[derive(Clone, Debug, PartialEq)]
pub enum Localizer {
    /// Eigenvectors of the site-index operator, ordered by position.
    Position,
    /// One site window per label, in label order.
    Windows(Vec<Vec<usize>>),
}

/// Columns ψ_k(t, t₀) of a quasiparticle frame.
#[derive(Clone, Debug)]
pub struct WavefunctionSet {
    /// 2M×2M; columns 0..M annihilators, M..2M their τ_x-conjugates.
    pub psi: CMat,
    /// Energies E_k ≥ 0 of the t₀ diagonalization, zero modes first.
    pub energies: Vec<f64>,
    /// Number of zero-mode pairs occupying the first columns.
    pub n_zero_pairs: usize,
    /// Self-conjugate Majorana vectors (2M × 2n) at time t.
    pub majoranas: CMat,
    pub t0: f64,
    pub t: f64,
}

pub fn tau_x_conj(w: &CVec) -> CVec {
    let m = w.len() / 2;
    CVec::from_fn(2 * m, |k, _| w[(k + m) % (2 * m)].conj())
}

fn to_real(w: &CVec) -> DVector<f64> {
    let m = w.len() / 2;
    DVector::from_fn(2 * m, |k, _| if k < m { w[k].re } else { w[k - m].im })
}

/// Self-conjugate Nambu vector (u; u*) with u = x + iy; unit r gives w†w = 2.
fn from_real(r: &DVector<f64>) -> CVec {
    let m = r.len() / 2;
    CVec::from_fn(2 * m, |k, _| {
        let j = k % m;
        let u = C64::new(r[j], r[m + j]);
        if k < m {
            u
        } else {
            u.conj()
        }
    })
}

fn real_gram_schmidt(cands: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in cands {
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
        }
        let n = v.norm();
        if n > tol {
            out.push(v / n);
        }
    }
    out
}

/// Real symmetric eigen-decomposition, ascending.
fn eigh_real(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| e.eigenvalues[x].total_cmp(&e.eigenvalues[y]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (d, &s) in order.iter().enumerate() {
        vecs.set_column(d, &e.eigenvectors.column(s));
    }
    (vals, vecs)
}

/// Largest-magnitude real component made positive.
fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best + 1e-12 {
            best = x.abs();
            sign = x.signum();
        }
    }
    *v *= sign;
}

/// Site weights of a real-represented vector, as a diagonal operator.
fn site_weight(m: usize, weight: impl Fn(usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(2 * m, 2 * m, |a, b| if a == b { weight(a % m) } else { 0.0 })
}

/// Splits a real basis of the zero subspace into localized Majoranas.
fn localize(basis: &[DVector<f64>], m: usize, loc: &Localizer) -> Result<Vec<DVector<f64>>> {
    let k = basis.len();
    let r = DMatrix::from_columns(basis);
    let mut out = match loc {
        Localizer::Position => {
            let x = site_weight(m, |j| j as f64);
            let (_, v) = eigh_real(&(r.transpose() * x * &r));
            (0..k).map(|c| &r * v.column(c)).collect::<Vec<_>>()
        }
        Localizer::Windows(windows) => {
            if windows.len() > k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: windows.len(),
                });
            }
            let k = windows.len();
            let picked: Vec<DVector<f64>> = windows
                .iter()
                .map(|w| {
                    let p = site_weight(m, |j| if w.contains(&j) { 1.0 } else { 0.0 });
                    let (_, v) = eigh_real(&(r.transpose() * p * &r));
                    &r * v.column(basis.len() - 1)
                })
                .collect();
            // Löwdin orthonormalization V (VᵀV)^{-1/2}.
            let v = DMatrix::from_columns(&picked);
            let (vals, vecs) = eigh_real(&(v.transpose() * &v));
            if vals[0] < 1e-8 {
                return Err(Error::Numerical(String::from(
                    "Majorana windows do not resolve the zero-mode subspace",
                )));
            }
            let inv_sqrt = &vecs
                * DMatrix::from_diagonal(&DVector::from_iterator(k, vals.iter().map(|x| 1.0 / libm::sqrt(*x))))
                * vecs.transpose();
            let o = v * inv_sqrt;
            (0..k).map(|c| o.column(c).into_owned()).collect()
        }
    };
    for v in out.iter_mut() {
        fix_sign(v);
    }
    Ok(out)
}

/// Windowed labels first; any leftover zero modes are position-localized in
/// the orthogonal complement.
fn localize_all(basis: &[DVector<f64>], m: usize, loc: &Localizer) -> Result<Vec<DVector<f64>>> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    match loc {
        Localizer::Windows(w) if w.len() < basis.len() => {
            let mut first = localize(basis, m, loc)?;
            let mut cands = first.clone();
            cands.extend_from_slice(basis);
            let full = real_gram_schmidt(&cands, 1e-6);
            let rest = localize(&full[first.len()..], m, &Localizer::Position)?;
            first.extend(rest);
            Ok(first)
        }
        _ => localize(basis, m, loc),
    }
}

/// Diagonalizes a BdG matrix into a PHS-paired frame. The `2·n_zero_pairs`
/// smallest-|E| eigenvectors are rebuilt as localized Majoranas and paired
/// into d_k = (γ_{2k−1} + iγ_{2k})/2; remaining positive-energy modes follow in
/// ascending energy.
pub fn diagonalize(h: &CMat, n_zero_pairs: usize, loc: &Localizer, t0: f64) -> Result<WavefunctionSet> {
    let dim = h.nrows();
    let m = dim / 2;
    if n_zero_pairs > m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: n_zero_pairs,
        });
    }
    let (vals, vecs) = eigh(h);
    let mut by_abs: Vec<usize> = (0..dim).collect();
    by_abs.sort_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()).then(a.cmp(&b)));
    let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    // Exact zeros beyond the requested modes are folded into the zero block.
    let mut nz = 2 * n_zero_pairs;
    while nz < dim && vals[by_abs[nz]].abs() < 1e-12 * scale {
        nz += 1;
    }
    nz += nz % 2;
    let zero_idx: Vec<usize> = by_abs[..nz].to_vec();
    let mut cands = Vec::with_capacity(2 * nz);
    for &k in &zero_idx {
        let v: CVec = vecs.column(k).into_owned();
        let tv = tau_x_conj(&v);
        cands.push(to_real(&(&v + &tv)));
        cands.push(to_real(&((&v - &tv) * I)));
    }
    let basis = real_gram_schmidt(&cands, 1e-6);
    if basis.len() != nz {
        return Err(Error::Numerical(alloc::format!(
            "zero-mode subspace is not particle-hole closed ({} real modes for {nz})",
            basis.len()
        )));
    }
    let gammas = localize_all(&basis, m, loc)?;
    let mut psi = CMat::zeros(dim, dim);
    let mut energies = vec![0.0; m];
    let mut majoranas = CMat::zeros(dim, 2 * n_zero_pairs);
    for k in 0..nz / 2 {
        let wa = from_real(&gammas[2 * k]);
        let wb = from_real(&gammas[2 * k + 1]);
        if k < n_zero_pairs {
            majoranas.set_column(2 * k, &wa);
            majoranas.set_column(2 * k + 1, &wb);
        }
        let d = (&wa - &wb * I) * C64::from(0.5);
        energies[k] = (d.adjoint() * h * &d)[(0, 0)].re;
        psi.set_column(m + k, &tau_x_conj(&d));
        psi.set_column(k, &d);
    }
    let mut positive: Vec<usize> = (0..dim).filter(|k| !zero_idx.contains(k) && vals[*k] > 0.0).collect();
    positive.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    if positive.len() != m - nz / 2 {
        return Err(Error::Numerical(String::from("BdG spectrum is not particle-hole symmetric")));
    }
    for (slot, &k) in positive.iter().enumerate() {
        let v: CVec = vecs.column(k).into_owned();
        psi.set_column(nz / 2 + slot, &v);
        psi.set_column(m + nz / 2 + slot, &tau_x_conj(&v));
        energies[nz / 2 + slot] = vals[k];
    }
    let res = unitarity_residual(&psi);
    if res > UNITARITY_TOL {
        return Err(Error::UnitarityLoss { residual: res });
    }
    Ok(WavefunctionSet {
        psi,
        energies,
        n_zero_pairs,
        majoranas,
        t0,
        t: t0,
    })
}

impl WavefunctionSet {
    pub fn n_sites(&self) -> usize {
        self.psi.nrows() / 2
    }

    /// Annihilator columns ψ_0..ψ_{M−1}.
    pub fn annihilators(&self) -> CMat {
        self.psi.columns(0, self.n_sites()).into_owned()
    }

    /// Frame moved by a single-particle propagator S(t, self.t).
    pub fn evolved(&self, s: &CMat, t: f64) -> Self {
        Self {
            psi: s * &self.psi,
            energies: self.energies.clone(),
            n_zero_pairs: self.n_zero_pairs,
            majoranas: s * &self.majoranas,
            t0: self.t0,
            t,
        }
    }

    /// Nambu vector of Majorana label `l` (1-based).
    pub fn majorana(&self, l: u32) -> Result<CVec> {
        let n = self.majoranas.ncols() as u32;
        if l == 0 || l > n {
            return Err(Error::LabelOutOfRange {
                label: l,
                n_majoranas: n,
            });
        }
        Ok(self.majoranas.column(l as usize - 1).into_owned())
    }
}

/// One sample of the optional time series.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub lowest_abs_energies: Vec<f64>,
    pub unitarity_residual: f64,
}

/// Options for [`propagate`].
#[derive(Clone, Debug)]
pub struct PropagateOptions {
    pub dt: f64,
    /// Record a trace point every this many steps (0 disables).
    pub trace_every: usize,
    /// Number of lowest |E| values per trace point.
    pub trace_levels: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            dt: 0.05,
            trace_every: 0,
            trace_levels: 4,
        }
    }
}

/// Number of equal midpoint steps of size ≤ dt covering [t_from, t_to].
pub fn step_count(t_from: f64, t_to: f64, dt: f64) -> usize {
    let span = (t_to - t_from).abs();
    if span == 0.0 {
        return 0;
    }
    libm::ceil(span / dt - 1e-9).max(1.0) as usize
}

/// Advances the single-particle propagator S from t_from to t_to by equal
/// steps exp(−iH(t_mid)δt). Runs backwards when t_to < t_from, retracing the
/// same grid, so forward-then-back returns the identity up to roundoff.
pub fn propagate(
    system: &BdGSystem,
    s: &CMat,
    t_from: f64,
    t_to: f64,
    opts: &PropagateOptions,
    trace: &mut Vec<TracePoint>,
) -> Result<CMat> {
    let mut s = s.clone();
    let steps = step_count(t_from, t_to, opts.dt);
    if steps == 0 {
        return Ok(s);
    }
    let dt = (t_to - t_from) / steps as f64;
    let m = system.n_sites();
    // Decoupled components evolve independently; each keeps its own cache.
    let blocks: Vec<Vec<usize>> = system
        .network
        .components()
        .into_iter()
        .map(|c| c.iter().copied().chain(c.iter().map(|&j| j + m)).collect())
        .collect();
    let mut cache: Vec<Option<(CMat, CMat, Vec<f64>)>> = vec![None; blocks.len()];
    for k in 0..steps {
        let t0 = t_from + k as f64 * dt;
        let t1 = if k + 1 == steps { t_to } else { t_from + (k + 1) as f64 * dt };
        let hm = system.assemble(0.5 * (t0 + t1))?;
        for (idx, slot) in blocks.iter().zip(cache.iter_mut()) {
            let sub = hm.select_rows(idx.iter()).select_columns(idx.iter());
            if !matches!(slot, Some((hc, _, _)) if *hc == sub) {
                let (vals, vecs) = eigh(&sub);
                let mut scaled = vecs.clone();
                for (c, e) in vals.iter().enumerate() {
                    let ph = C64::from_polar(1.0, -e * dt);
                    scaled.column_mut(c).iter_mut().for_each(|z| *z *= ph);
                }
                *slot = Some((sub, scaled * vecs.adjoint(), vals));
            }
            let u = &slot.as_ref().unwrap().1;
            let rows = u * s.select_rows(idx.iter());
            for (r, &i) in idx.iter().enumerate() {
                s.row_mut(i).copy_from(&rows.row(r));
            }
        }
        if opts.trace_every > 0 && (k % opts.trace_every == 0 || k + 1 == steps) {
            let mut abs: Vec<f64> = cache
                .iter()
                .flat_map(|c| c.as_ref().unwrap().2.iter().map(|e| e.abs()))
                .collect();
            abs.sort_by(f64::total_cmp);
            abs.truncate(opts.trace_levels);
            let res = unitarity_residual(&s);
            if res > UNITARITY_TOL {
                return Err(Error::UnitarityLoss { residual: res });
            }
            trace.push(TracePoint {
                t: 0.5 * (t0 + t1),
                lowest_abs_energies: abs,
                unitarity_residual: res,
            });
        }
    }
    let res = unitarity_residual(&s);
    if res > UNITARITY_TOL {
        return Err(Error::UnitarityLoss { residual: res });
    }
    Ok(s)
}

/// Bogoliubov matrices between two frames: X_ij = ψ_i(a)†ψ_j(b),
/// Y_ij = ψ_i(a)ᵀτ_xψ_j(b).
#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovXY {
    pub x: CMat,
    pub y: CMat,
}

pub fn bogoliubov_xy(a: &WavefunctionSet, b: &WavefunctionSet) -> Result<BogoliubovXY> {
    if a.psi.nrows() != b.psi.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.psi.nrows(),
            found: b.psi.nrows(),
        });
    }
    let m = a.n_sites();
    let pa = a.annihilators();
    let pb = b.annihilators();
    let x = pa.adjoint() * &pb;
    let mut tpb = CMat::zeros(2 * m, m);
    tpb.rows_mut(0, m).copy_from(&pb.rows(m, m));
    tpb.rows_mut(m, m).copy_from(&pb.rows(0, m));
    let y = pa.transpose() * tpb;
    Ok(BogoliubovXY { x, y })
}

impl BogoliubovXY {
    /// max(|X†X + Y†Y − I|, |XᵀY + YᵀX|).
    pub fn canonicity_residual(&self) -> f64 {
        let m = self.x.ncols();
        let a = &self.x.adjoint() * &self.x + self.y.adjoint() * &self.y - CMat::identity(m, m);
        let b = self.x.transpose() * &self.y + self.y.transpose() * &self.x;
        max_abs(&a).max(max_abs(&b))
    }
}

/// Smallest singular value of a†b: 1 when two orthonormal column sets span
/// the same subspace.
pub fn subspace_overlap(a: &CMat, b: &CMat) -> f64 {
    let s = (a.adjoint() * b).singular_values();
    s.iter().fold(f64::INFINITY, |acc, &x| acc.min(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdg::{random_bdg, ParameterSchedule, Segment, Target, WireNetwork};
    use crate::fock::{vacuum, FockSpace, LinearFermion};
    use crate::linalg::expm_hermitian;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain(n: usize, mu: f64) -> WireNetwork {
        let mut net = WireNetwork::new(n, mu);
        net.add_wire("w", (0..n).collect(), 1.0, 1.0, 0.0).unwrap();
        net
    }


    #[test]
    fn diagonal_hamiltonian_gives_coordinate_vectors() {
        let e = [0.5, 1.5, 1.0];
        let mut h = CMat::zeros(6, 6);
        for (k, x) in e.iter().enumerate() {
            h[(k, k)] = C64::from(*x);
            h[(k + 3, k + 3)] = C64::from(-x);
        }
        let ws = diagonalize(&h, 0, &Localizer::Position, 0.0).unwrap();
        assert_eq!(ws.energies, vec![0.5, 1.0, 1.5]);
        for (col, site) in [(0, 0), (1, 2), (2, 1)] {
            assert!((ws.psi[(site, col)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sweet_spot_zero_modes_sit_on_the_ends() {
        let h = chain(2, 0.0).assemble_with(&[0.0, 0.0], &[1.0]);
        let ws = diagonalize(&h, 1, &Localizer::Position, 0.0).unwrap();
        let g1 = ws.majorana(1).unwrap();
        let g2 = ws.majorana(2).unwrap();
        assert!((g1[0].norm() - 1.0).abs() < 1e-12 && g1[1].norm() < 1e-12);
        assert!((g2[1].norm() - 1.0).abs() < 1e-12 && g2[0].norm() < 1e-12);
        for g in [&g1, &g2] {
            assert!((&h * g).norm() < 1e-12);
            assert!((tau_x_conj(g) - g).norm() < 1e-14);
        }
        assert_eq!(ws.energies.len(), 2);
        assert!((ws.energies[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energies_ascending_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_bdg(&mut rng, 6);
        let ws = diagonalize(&h, 0, &Localizer::Position, 0.0).unwrap();
        assert!(ws.energies.windows(2).all(|w| w[0] <= w[1]));
        assert!(ws.energies.iter().all(|&e| e >= -1e-12));
        for k in 0..6 {
            let v = ws.psi.column(k).into_owned();
            assert!((&h * &v - &v * C64::from(ws.energies[k])).norm() < 1e-10);
        }
    }

    #[test]
    fn windows_pick_requested_labels() {
        let net = chain(12, 0.0);
        let h = net.assemble_with(&[0.0; 12], &[1.0; 11]);
        // Label 1 at the right end, label 2 at the left end.
        let ws = diagonalize(&h, 1, &Localizer::Windows(vec![vec![10, 11], vec![0, 1]]), 0.0).unwrap();
        assert!(ws.majorana(1).unwrap()[11].norm() > 0.99);
        assert!(ws.majorana(2).unwrap()[0].norm() > 0.99);
    }

    #[test]
    fn time_independent_propagation_is_exponential() {
        let net = chain(5, 0.3);
        let sys = BdGSystem::new(net, ParameterSchedule::constant(3.0), None).unwrap();
        let h = sys.assemble(0.0).unwrap();
        let mut tr = Vec::new();
        let s = propagate(&sys, &CMat::identity(10, 10), 0.0, 2.3, &PropagateOptions { dt: 0.1, ..Default::default() }, &mut tr).unwrap();
        assert!(max_abs(&(s - expm_hermitian(&h, 2.3))) < 1e-12);
    }

    fn ramped_system() -> BdGSystem {
        let net = chain(6, 0.0);
        let segs = vec![
            Segment { t_start: 0.0, t_end: 2.0, targets: vec![Target::Mu { site: 5, value: 3.0 }] },
            Segment { t_start: 2.0, t_end: 3.5, targets: vec![Target::Mu { site: 4, value: 3.0 }, Target::BondScale { bond: 0, value: 0.5 }] },
        ];
        BdGSystem::new(net, ParameterSchedule { t_total: 4.0, segments: segs }, None).unwrap()
    }

    #[test]
    fn forward_then_back_is_identity() {
        let sys = ramped_system();
        let opts = PropagateOptions { dt: 0.07, trace_every: 5, trace_levels: 4 };
        let mut tr = Vec::new();
        let s = propagate(&sys, &CMat::identity(12, 12), 0.0, 4.0, &opts, &mut tr).unwrap();
        let back = propagate(&sys, &s, 4.0, 0.0, &opts, &mut tr).unwrap();
        assert!(max_abs(&(back - CMat::identity(12, 12))) < 1e-8);
        assert!(tr.iter().all(|p| p.unitarity_residual < 1e-9 && p.lowest_abs_energies.len() == 4));
    }

    #[test]
    fn self_overlap_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ws = diagonalize(&random_bdg(&mut rng, 5), 0, &Localizer::Position, 0.0).unwrap();
        let xy = bogoliubov_xy(&ws, &ws).unwrap();
        assert!(max_abs(&(&xy.x - CMat::identity(5, 5))) < 1e-12);
        assert!(max_abs(&xy.y) < 1e-12);
    }

    #[test]
    fn propagated_frames_are_canonical() {
        let sys = ramped_system();
        let h0 = sys.assemble(0.0).unwrap();
        let ws = diagonalize(&h0, 1, &Localizer::Position, 0.0).unwrap();
        let s = propagate(&sys, &CMat::identity(12, 12), 0.0, 4.0, &PropagateOptions::default(), &mut Vec::new()).unwrap();
        let xy = bogoliubov_xy(&ws, &ws.evolved(&s, 4.0)).unwrap();
        assert!(xy.canonicity_residual() < 1e-9);
        assert!(max_abs(&xy.y) > 1e-6);
    }

    #[test]
    fn onishi_overlap_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let m = 3;
            let a = diagonalize(&random_bdg(&mut rng, m), 0, &Localizer::Position, 0.0).unwrap();
            let b = diagonalize(&random_bdg(&mut rng, m), 0, &Localizer::Position, 0.0).unwrap();
            let f = FockSpace::with_modes(m as u32).unwrap();
            let ds = |w: &WavefunctionSet| -> Vec<LinearFermion> {
                (0..m).map(|k| LinearFermion::from_nambu(&w.psi.column(k).into_owned())).collect()
            };
            let va = vacuum(&f, &ds(&a)).unwrap();
            let vb = vacuum(&f, &ds(&b)).unwrap();
            let xy = bogoliubov_xy(&a, &b).unwrap();
            let ov = va.dotc(&vb).norm_sqr();
            // Opposite vacuum parities give zero overlap and singular X.
            assert!((ov - xy.x.determinant().norm()).abs() < 1e-10, "{ov} vs {}", xy.x.determinant().norm());
        }
    }
}
