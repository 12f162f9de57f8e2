//! Wire devices hosting labelled Majorana positions, and the keyboard compiler
//! turning braids and dwells into μ schedules.
//!
//! A device is a direct sum of decoupled cells. A junction cell is a
//! T-junction: three arms of `arm_len` sites joined at a shared site J, each arm
//! a wire oriented outward from J. Its topological segment initially covers
//! the first `seg_len` sites of arms 0 and 1 plus J, so the two labelled end
//! positions sit at the far ends of those arms. A wire cell is a fully
//! topological straight chain with a label at each end. Labels name positions,
//! not quasiparticles: a braid exchanges the contents of two positions and
//! restores the set of topological sites.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bdg::{BdGSystem, DisorderSpec, ParameterSchedule, Segment, Target, WireNetwork};
use crate::error::{Error, Result};
use crate::evolution::{diagonalize, Localizer};
use crate::linalg::{CMat, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceParams {
    pub hopping: f64,
    pub pairing: f64,
    pub mu_topo: f64,
    pub mu_trivial: f64,
    /// Sites per junction arm, excluding J.
    pub arm_len: usize,
    /// Topological sites per arm side of a junction segment.
    pub seg_len: usize,
    /// Sites in a wire cell.
    pub wire_len: usize,
    /// Ramp time of one single-site μ move.
    pub move_time: f64,
    /// Pairing phases of junction arms 0, 1, 2.
    pub arm_phases: [f64; 3],
    /// Sites kept topological while dwelling.
    pub dwell_len: usize,
    pub mu_dwell: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let third = 2.0 * core::f64::consts::PI / 3.0;
        Self {
            hopping: 1.0,
            pairing: 1.0,
            mu_topo: 0.0,
            mu_trivial: 5.0,
            arm_len: 20,
            seg_len: 4,
            wire_len: 6,
            move_time: 10.0,
            arm_phases: [0.0, third, 2.0 * third],
            dwell_len: 2,
            mu_dwell: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Junction,
    Wire,
}

/// Requested cell: kind plus the labels of its two end positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellSpec {
    pub kind: CellKind,
    pub labels: (u32, u32),
}

impl CellSpec {
    pub fn junction(a: u32, b: u32) -> Self {
        Self { kind: CellKind::Junction, labels: (a, b) }
    }

    pub fn wire(a: u32, b: u32) -> Self {
        Self { kind: CellKind::Wire, labels: (a, b) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub spec: CellSpec,
    pub offset: usize,
    pub n_sites: usize,
}

#[derive(Clone, Debug)]
pub struct Device {
    pub params: DeviceParams,
    pub cells: Vec<Cell>,
    pub network: WireNetwork,
    /// Static μ disorder applied to every system built from this device.
    pub disorder: Option<DisorderSpec>,
}

impl Device {
    pub fn new(params: DeviceParams, specs: &[CellSpec]) -> Result<Self> {
        let p = &params;
        if p.seg_len == 0 || p.seg_len + 1 > p.arm_len {
            return Err(Error::InvalidDevice(format!(
                "segment length {} needs 1 ≤ seg_len < arm_len = {}",
                p.seg_len, p.arm_len
            )));
        }
        if p.wire_len < 2 || p.dwell_len == 0 || p.dwell_len > p.wire_len {
            return Err(Error::InvalidDevice(format!(
                "wire length {} and dwell length {} are inconsistent",
                p.wire_len, p.dwell_len
            )));
        }
        let n = 2 * specs.len() as u32;
        let mut seen = vec![false; n as usize];
        for s in specs {
            for l in [s.labels.0, s.labels.1] {
                if l == 0 || l > n || core::mem::replace(&mut seen[l as usize - 1], true) {
                    return Err(Error::InvalidDevice(format!(
                        "labels must cover 1..={n} exactly once; {l} is out of range or repeated"
                    )));
                }
            }
        }
        let mut cells = Vec::new();
        let mut offset = 0;
        for s in specs {
            let n_sites = match s.kind {
                CellKind::Junction => 3 * p.arm_len + 1,
                CellKind::Wire => p.wire_len,
            };
            cells.push(Cell { spec: *s, offset, n_sites });
            offset += n_sites;
        }
        let mut network = WireNetwork::new(offset, p.mu_trivial);
        for (c, cell) in cells.iter().enumerate() {
            match cell.spec.kind {
                CellKind::Junction => {
                    for arm in 0..3 {
                        let mut sites = vec![cell.offset];
                        sites.extend((1..=p.arm_len).map(|k| arm_site(cell, p, arm, k)));
                        network.add_wire(&format!("cell{c}.arm{arm}"), sites, p.hopping, p.pairing, p.arm_phases[arm])?;
                    }
                    network.mu[cell.offset] = p.mu_topo;
                    for arm in 0..2 {
                        for k in 1..=p.seg_len {
                            network.mu[arm_site(cell, p, arm, k)] = p.mu_topo;
                        }
                    }
                }
                CellKind::Wire => {
                    let sites: Vec<usize> = (cell.offset..cell.offset + cell.n_sites).collect();
                    for &s in &sites {
                        network.mu[s] = p.mu_topo;
                    }
                    network.add_wire(&format!("cell{c}.wire"), sites, p.hopping, p.pairing, p.arm_phases[0])?;
                }
            }
        }
        network.validate()?;
        Ok(Self { params, cells, network, disorder: None })
    }

    /// One sparse qubit whose γ₂, γ₃ share a junction; γ₁, γ₄ idle on a wire.
    pub fn sparse_qubit(params: DeviceParams) -> Result<Self> {
        Self::new(params, &[CellSpec::wire(1, 4), CellSpec::junction(2, 3)])
    }

    /// Junction cells for the given disjoint label pairs; the remaining labels
    /// of 1..=n_majoranas are paired in ascending order on wire cells.
    pub fn for_braids(params: DeviceParams, n_majoranas: u32, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut used = vec![false; n_majoranas as usize + 1];
        let mut specs = Vec::new();
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > n_majoranas || b > n_majoranas || a == b || used[a as usize] || used[b as usize] {
                return Err(Error::InvalidDevice(format!("braid pair ({a}, {b}) is not disjoint and in range")));
            }
            used[a as usize] = true;
            used[b as usize] = true;
            specs.push(CellSpec::junction(a, b));
        }
        let rest: Vec<u32> = (1..=n_majoranas).filter(|&l| !used[l as usize]).collect();
        if rest.len() % 2 == 1 {
            return Err(Error::InvalidDevice(String::from("odd number of Majorana labels")));
        }
        for w in rest.chunks(2) {
            specs.push(CellSpec::wire(w[0], w[1]));
        }
        Self::new(params, &specs)
    }

    pub fn n_sites(&self) -> usize {
        self.network.n_sites()
    }

    pub fn n_majoranas(&self) -> u32 {
        2 * self.cells.len() as u32
    }

    fn cell_of(&self, label: u32) -> Result<(&Cell, bool)> {
        self.cells
            .iter()
            .find_map(|c| match c.spec.labels {
                (a, _) if a == label => Some((c, true)),
                (_, b) if b == label => Some((c, false)),
                _ => None,
            })
            .ok_or(Error::LabelOutOfRange { label, n_majoranas: self.n_majoranas() })
    }

    /// Site windows of every label, in label order, for localizing the
    /// initial zero modes.
    pub fn label_windows(&self) -> Vec<Vec<usize>> {
        let p = &self.params;
        (1..=self.n_majoranas())
            .map(|l| {
                let (cell, first) = self.cell_of(l).expect("labels cover the device");
                match cell.spec.kind {
                    CellKind::Junction => {
                        let arm = if first { 0 } else { 1 };
                        (1..=p.arm_len).map(|k| arm_site(cell, p, arm, k)).collect()
                    }
                    CellKind::Wire => {
                        let half = cell.n_sites / 2;
                        if first {
                            (cell.offset..cell.offset + half).collect()
                        } else {
                            (cell.offset + cell.n_sites - half..cell.offset + cell.n_sites).collect()
                        }
                    }
                }
            })
            .collect()
    }

    pub fn localizer(&self) -> Localizer {
        Localizer::Windows(self.label_windows())
    }

    pub fn program(&self) -> Program<'_> {
        Program { device: self, t: 0.0, segments: Vec::new() }
    }

    pub fn system(&self, schedule: ParameterSchedule) -> Result<BdGSystem> {
        BdGSystem::new(self.network.clone(), schedule, self.disorder)
    }

    /// Dwell angle of a hold-free dwell, and the angle rate while holding,
    /// from a midpoint scan of the instantaneous pair splitting with step dt.
    pub fn dwell_scan(&self, i: u32, j: u32, dt: f64) -> Result<DwellScan> {
        let (cell, i_left) = self.dwell_cell(i, j)?;
        let mut prog = self.program();
        prog.dwell(i, j, 0.0)?;
        let t_ramp_end = prog.now();
        let schedule = prog.finish();
        let sys = self.system(schedule)?;
        let idx: Vec<usize> = (cell.offset..cell.offset + cell.n_sites)
            .chain((cell.offset..cell.offset + cell.n_sites).map(|s| s + self.n_sites()))
            .collect();
        let mut prev: Option<CMat> = None;
        let mut rate_at = |t: f64| -> Result<f64> {
            let h = sys.assemble(t)?;
            let sub = h.select_rows(idx.iter()).select_columns(idx.iter());
            let ws = diagonalize(&sub, 1, &Localizer::Position, t)?;
            let mut g = ws.majoranas.clone();
            if let Some(pg) = &prev {
                // Keep each Majorana's sign continuous along the scan.
                for c in 0..2 {
                    if (pg.column(c).dotc(&g.column(c))).re < 0.0 {
                        g.column_mut(c).iter_mut().for_each(|z| *z = -*z);
                    }
                }
            }
            let (a, b) = if i_left { (0, 1) } else { (1, 0) };
            let r = (g.column(a).adjoint() * &sub * g.column(b))[(0, 0)] * C64::new(0.0, -0.25);
            prev = Some(g);
            Ok(r.re)
        };
        let steps = libm::ceil(t_ramp_end / dt).max(2.0) as usize;
        let h = t_ramp_end / steps as f64;
        let mut ramp_angle = 0.0;
        let mut hold_rate = 0.0;
        for k in 0..steps {
            if k == steps / 2 {
                // The hold-free dwell is symmetric; its midpoint is the held configuration.
                hold_rate = rate_at(0.5 * t_ramp_end)?;
            }
            ramp_angle += rate_at((k as f64 + 0.5) * h)? * h;
        }
        Ok(DwellScan { ramp_angle, hold_rate })
    }

    /// Hold time realizing exp(angle·γ_iγ_j), reduced modulo the π period.
    pub fn calibrate_dwell(&self, i: u32, j: u32, angle: f64, dt: f64) -> Result<f64> {
        let scan = self.dwell_scan(i, j, dt)?;
        if scan.hold_rate.abs() < 1e-12 {
            return Err(Error::InvalidDevice(format!("dwell of ({i}, {j}) produces no splitting")));
        }
        let period = core::f64::consts::PI / scan.hold_rate.abs();
        let hold = (angle - scan.ramp_angle) / scan.hold_rate;
        let r = libm::fmod(hold, period);
        Ok(if r < 0.0 { r + period } else { r })
    }

    fn dwell_cell(&self, i: u32, j: u32) -> Result<(&Cell, bool)> {
        let (cell, i_left) = self.cell_of(i)?;
        let (other, _) = self.cell_of(j)?;
        if cell.offset != other.offset || i == j {
            return Err(Error::InvalidDevice(format!("labels {i} and {j} do not share a cell")));
        }
        if cell.spec.kind != CellKind::Wire {
            return Err(Error::InvalidDevice(format!("dwell of ({i}, {j}) needs a wire cell")));
        }
        Ok((cell, i_left))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DwellScan {
    pub ramp_angle: f64,
    pub hold_rate: f64,
}

fn arm_site(cell: &Cell, p: &DeviceParams, arm: usize, k: usize) -> usize {
    cell.offset + 1 + arm * p.arm_len + (k - 1)
}

/// Incremental schedule builder; events append one after another.
#[derive(Clone, Debug)]
pub struct Program<'a> {
    device: &'a Device,
    t: f64,
    segments: Vec<Segment>,
}

impl Program<'_> {
    pub fn now(&self) -> f64 {
        self.t
    }

    fn ramp(&mut self, targets: Vec<Target>, duration: f64) {
        self.segments.push(Segment {
            t_start: self.t,
            t_end: self.t + duration,
            targets,
        });
        self.t += duration;
    }

    fn mu_move(&mut self, site: usize, value: f64) {
        let tau = self.device.params.move_time;
        self.ramp(vec![Target::Mu { site, value }], tau);
    }

    pub fn idle(&mut self, duration: f64) {
        if duration > 0.0 {
            self.ramp(Vec::new(), duration);
        }
    }

    /// Exchange of the two end positions of a junction segment, realizing
    /// B_ij = exp(π/4 γ_iγ_j). The end at i retracts through J into the free
    /// arm, j's end takes i's arm, then i's end moves into j's old arm.
    pub fn braid(&mut self, i: u32, j: u32) -> Result<()> {
        let d = self.device;
        let (cell, i_first) = d.cell_of(i)?;
        let (other, _) = d.cell_of(j)?;
        if cell.offset != other.offset || i == j || cell.spec.kind != CellKind::Junction {
            return Err(Error::InvalidDevice(format!(
                "braid ({i}, {j}) needs both labels at the ends of one junction segment"
            )));
        }
        let cell = cell.clone();
        let p = d.params.clone();
        let (x, y) = if i_first { (0, 1) } else { (1, 0) };
        let (x, y) = if BRAID_FIRST_MOVER_IS_I { (x, y) } else { (y, x) };
        for (from, to) in [(x, 2), (y, x), (2, y)] {
            for k in (1..=p.seg_len).rev() {
                self.mu_move(arm_site(&cell, &p, from, k), p.mu_trivial);
            }
            for k in 1..=p.seg_len {
                self.mu_move(arm_site(&cell, &p, to, k), p.mu_topo);
            }
        }
        Ok(())
    }

    /// Shrinks the wire holding i and j to `dwell_len` sites, raises their μ
    /// to `mu_dwell`, holds, and restores.
    pub fn dwell(&mut self, i: u32, j: u32, hold: f64) -> Result<()> {
        let d = self.device;
        let (cell, _) = d.dwell_cell(i, j)?;
        let cell = cell.clone();
        let p = d.params.clone();
        let end = cell.offset + cell.n_sites;
        let keep = cell.offset..cell.offset + p.dwell_len;
        for s in (keep.end..end).rev() {
            self.mu_move(s, p.mu_trivial);
        }
        let tau = p.move_time;
        self.ramp(keep.clone().map(|site| Target::Mu { site, value: p.mu_dwell }).collect(), tau);
        self.idle(hold);
        self.ramp(keep.clone().map(|site| Target::Mu { site, value: p.mu_topo }).collect(), tau);
        for s in keep.end..end {
            self.mu_move(s, p.mu_topo);
        }
        Ok(())
    }

    pub fn finish(self) -> ParameterSchedule {
        ParameterSchedule {
            t_total: self.t,
            segments: self.segments,
        }
    }
}

/// Orientation of the keyboard exchange giving B_ij rather than B_ji with the
/// default arm phases; fixed by comparing against the ideal braid.
const BRAID_FIRST_MOVER_IS_I: bool = true;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::subspace_overlap;

    fn small() -> DeviceParams {
        DeviceParams {
            arm_len: 4,
            seg_len: 2,
            wire_len: 4,
            move_time: 4.0,
            ..DeviceParams::default()
        }
    }

    #[test]
    fn sparse_qubit_has_four_zero_modes() {
        let d = Device::sparse_qubit(small()).unwrap();
        assert_eq!(d.n_sites(), 4 + 13);
        let sys = d.system(ParameterSchedule::constant(1.0)).unwrap();
        let probe = sys.spectrum_probe(0.0, None).unwrap();
        assert_eq!(probe.n_zero, 4);
    }

    #[test]
    fn label_validation() {
        assert!(Device::new(small(), &[CellSpec::wire(1, 1)]).is_err());
        assert!(Device::new(small(), &[CellSpec::wire(1, 3)]).is_err());
        assert!(Device::for_braids(small(), 4, &[(2, 3), (3, 1)]).is_err());
        let d = Device::for_braids(small(), 8, &[(1, 2), (6, 7), (8, 3)]).unwrap();
        assert_eq!(d.cells.len(), 4);
        assert_eq!(d.cells[3].spec, CellSpec::wire(4, 5));
    }

    #[test]
    fn windows_localize_labelled_majoranas() {
        let d = Device::sparse_qubit(small()).unwrap();
        let sys = d.system(ParameterSchedule::constant(1.0)).unwrap();
        let ws = diagonalize(&sys.assemble(0.0).unwrap(), 2, &d.localizer(), 0.0).unwrap();
        let m = d.n_sites();
        for (l, win) in d.label_windows().iter().enumerate() {
            let w = ws.majoranas.column(l);
            let inside: f64 = win.iter().map(|&s| w[s].norm_sqr() + w[s + m].norm_sqr()).sum();
            assert!(inside > 1.99, "label {} weight {inside}", l + 1);
        }
    }

    #[test]
    fn braid_restores_configuration_and_keeps_gap() {
        let d = Device::sparse_qubit(small()).unwrap();
        let mut prog = d.program();
        prog.braid(2, 3).unwrap();
        let t_end = prog.now();
        assert_eq!(t_end, 12.0 * 4.0);
        let sys = d.system(prog.finish()).unwrap();
        assert_eq!(sys.assemble(0.0).unwrap(), sys.assemble(t_end).unwrap());
        let ws0 = diagonalize(&sys.assemble(0.0).unwrap(), 2, &d.localizer(), 0.0).unwrap();
        for k in 0..=24 {
            let t = t_end * k as f64 / 24.0;
            let probe = sys.spectrum_probe(t, None).unwrap();
            assert_eq!(probe.n_zero, 4, "t = {t}");
            assert!(probe.bulk_gap > 0.2, "t = {t}: gap {}", probe.bulk_gap);
        }
        let ws1 = diagonalize(&sys.assemble(t_end).unwrap(), 2, &d.localizer(), t_end).unwrap();
        assert!(subspace_overlap(&ws0.majoranas, &ws1.majoranas) > 1.0 - 1e-9);
    }

    #[test]
    fn braid_rejects_labels_on_different_cells() {
        let d = Device::sparse_qubit(small()).unwrap();
        assert!(d.program().braid(1, 2).is_err());
        assert!(d.program().dwell(2, 3, 1.0).is_err());
    }

    #[test]
    fn dwell_splits_the_pair() {
        let d = Device::new(small(), &[CellSpec::wire(1, 2), CellSpec::wire(3, 4)]).unwrap();
        let scan = d.dwell_scan(1, 2, 0.05).unwrap();
        assert!(scan.hold_rate.abs() > 1e-3);
        let hold = d.calibrate_dwell(1, 2, core::f64::consts::PI / 8.0, 0.05).unwrap();
        assert!(hold >= 0.0 && hold < core::f64::consts::PI / scan.hold_rate.abs());
    }
}
