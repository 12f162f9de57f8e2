//! Run configuration: one TOML file with `[network]`, `[disorder]`,
//! `[schedule]` and `[run]` sections. Times and energies are in hopping
//! units.

use std::path::{Path, PathBuf};

use majorana_core::bdg::DisorderSpec;
use majorana_core::device::{CellKind, CellSpec, Device, DeviceParams};
use majorana_core::evolution::PropagateOptions;
use majorana_core::logical::{cnot, cz, embed_single, single_qubit_gates};
use majorana_core::protocol::{Basis, BasisKind, Event, OutcomePolicy, Schedule};
use majorana_core::CMat;
use serde::Deserialize;

use crate::error::SimError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub disorder: DisorderSection,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub hopping: f64,
    pub pairing: f64,
    pub mu_topo: f64,
    pub mu_trivial: f64,
    pub arm_len: usize,
    pub seg_len: usize,
    pub wire_len: usize,
    pub move_time: f64,
    pub arm_phases: [f64; 3],
    pub dwell_len: usize,
    pub mu_dwell: f64,
    /// Explicit cells; when empty, one junction per braided pair and wires
    /// for the remaining labels.
    pub cells: Vec<CellEntry>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let p = DeviceParams::default();
        Self {
            hopping: p.hopping,
            pairing: p.pairing,
            mu_topo: p.mu_topo,
            mu_trivial: p.mu_trivial,
            arm_len: p.arm_len,
            seg_len: p.seg_len,
            wire_len: p.wire_len,
            move_time: p.move_time,
            arm_phases: p.arm_phases,
            dwell_len: p.dwell_len,
            mu_dwell: p.mu_dwell,
            cells: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKindEntry {
    Junction,
    Wire,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    pub kind: CellKindEntry,
    pub labels: [u32; 2],
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSection {
    pub seed: u64,
    /// Width W of the uniform μ offsets on [−W/2, W/2].
    pub amplitude: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub qubits: u32,
    /// Declared target: `auto` (the ideal map of the schedule), `identity`,
    /// `cnot`, `cz`, or a single-qubit gate as `name:qubit`, e.g. `sqrt_X:1`.
    #[serde(default = "auto")]
    pub target: String,
    #[serde(default, rename = "event")]
    pub events: Vec<EventEntry>,
}

fn auto() -> String {
    String::from("auto")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeEntry {
    Even,
    Odd,
    Sampled,
}

impl From<OutcomeEntry> for OutcomePolicy {
    fn from(o: OutcomeEntry) -> Self {
        match o {
            OutcomeEntry::Even => OutcomePolicy::Forced(1),
            OutcomeEntry::Odd => OutcomePolicy::Forced(-1),
            OutcomeEntry::Sampled => OutcomePolicy::Sampled,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventEntry {
    Braid { labels: [u32; 2] },
    Dwell { labels: [u32; 2], angle: f64 },
    ProjectPair { labels: [u32; 2], #[serde(default = "even")] outcome: OutcomeEntry },
    ProjectQuad { qubit: u32, #[serde(default = "even")] outcome: OutcomeEntry },
    Readout,
}

fn even() -> OutcomeEntry {
    OutcomeEntry::Even
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisEntry {
    Logical,
    ZeroModes,
    ZeroModesEven,
    ZeroModesOdd,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub dt: f64,
    pub basis: BasisEntry,
    /// Bound on the propagator unitarity residual; exceeding it is a
    /// numerical failure.
    pub tol: f64,
    pub seed: u64,
    /// Logical basis index whose Born rule resolves sampled outcomes.
    pub input: usize,
    /// Trace stride in steps for the CSV spectrum; 0 disables it.
    pub trace_every: usize,
    pub trace_levels: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt: 0.05,
            basis: BasisEntry::Logical,
            tol: 1e-8,
            seed: 0,
            input: 0,
            trace_every: 0,
            trace_levels: 4,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            SimError::Config(m) => SimError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn check(&self) -> Result<(), SimError> {
        let r = &self.run;
        if !(r.dt.is_finite() && r.dt > 0.0) {
            return Err(SimError::Config(format!("[run] dt must be positive, got {}", r.dt)));
        }
        if !(r.tol.is_finite() && r.tol > 0.0) {
            return Err(SimError::Config(format!("[run] tol must be positive, got {}", r.tol)));
        }
        if !(self.disorder.amplitude.is_finite() && self.disorder.amplitude >= 0.0) {
            return Err(SimError::Config(String::from("[disorder] amplitude must be non-negative")));
        }
        let schedule = self.schedule()?;
        if r.input >= 1 << schedule.n_qubits {
            return Err(SimError::Config(format!(
                "[run] input {} outside the {}-state logical basis",
                r.input,
                1u64 << schedule.n_qubits
            )));
        }
        if self.target_unitary()?.is_some() && r.basis != BasisEntry::Logical {
            return Err(SimError::Config(String::from("[schedule] an explicit target needs basis = \"logical\"")));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<Schedule, SimError> {
        let events = self
            .schedule
            .events
            .iter()
            .map(|e| match *e {
                EventEntry::Braid { labels: [i, j] } => Event::Braid { i, j },
                EventEntry::Dwell { labels: [i, j], angle } => Event::Dwell { i, j, angle },
                EventEntry::ProjectPair { labels: [a, b], outcome } => {
                    Event::ProjectPair { a, b, outcome: outcome.into() }
                }
                EventEntry::ProjectQuad { qubit, outcome } => Event::ProjectQuad { qubit, outcome: outcome.into() },
                EventEntry::Readout => Event::Readout,
            })
            .collect();
        Schedule::new(self.schedule.qubits, events).map_err(|e| SimError::Config(format!("[schedule] {e}")))
    }

    pub fn device_params(&self) -> DeviceParams {
        let n = &self.network;
        DeviceParams {
            hopping: n.hopping,
            pairing: n.pairing,
            mu_topo: n.mu_topo,
            mu_trivial: n.mu_trivial,
            arm_len: n.arm_len,
            seg_len: n.seg_len,
            wire_len: n.wire_len,
            move_time: n.move_time,
            arm_phases: n.arm_phases,
            dwell_len: n.dwell_len,
            mu_dwell: n.mu_dwell,
        }
    }

    /// The device hosting the schedule's Majoranas, with disorder attached.
    pub fn device(&self) -> Result<Device, SimError> {
        let schedule = self.schedule()?;
        let params = self.device_params();
        let n_maj = schedule.n_majoranas();
        let mut device = if self.network.cells.is_empty() {
            let mut pairs: Vec<(u32, u32)> = Vec::new();
            for e in &schedule.events {
                if let Event::Braid { i, j } = *e {
                    let key = (i.min(j), i.max(j));
                    if !pairs.contains(&key) {
                        pairs.push(key);
                    }
                }
            }
            Device::for_braids(params, n_maj, &pairs)
        } else {
            let specs: Vec<CellSpec> = self
                .network
                .cells
                .iter()
                .map(|c| match c.kind {
                    CellKindEntry::Junction => CellSpec::junction(c.labels[0], c.labels[1]),
                    CellKindEntry::Wire => CellSpec::wire(c.labels[0], c.labels[1]),
                })
                .collect();
            Device::new(params, &specs)
        }
        .map_err(|e| SimError::Config(format!("[network] {e}")))?;
        if device.n_majoranas() != n_maj {
            return Err(SimError::Config(format!(
                "[network] cells host {} Majoranas, the schedule needs {n_maj}",
                device.n_majoranas()
            )));
        }
        for (k, e) in schedule.events.iter().enumerate() {
            let (i, j, want) = match *e {
                Event::Braid { i, j } => (i, j, CellKind::Junction),
                Event::Dwell { i, j, .. } => (i, j, CellKind::Wire),
                _ => continue,
            };
            let ok = device
                .cells
                .iter()
                .any(|c| c.spec.kind == want && (c.spec.labels == (i, j) || c.spec.labels == (j, i)));
            if !ok {
                return Err(SimError::Config(format!(
                    "[schedule] event {k}: labels ({i}, {j}) do not share a {} cell",
                    if want == CellKind::Junction { "junction" } else { "wire" }
                )));
            }
        }
        if self.disorder.amplitude > 0.0 {
            device.disorder = Some(DisorderSpec { seed: self.disorder.seed, amplitude: self.disorder.amplitude });
        }
        Ok(device)
    }

    pub fn basis(&self) -> Basis {
        let kind = match self.run.basis {
            BasisEntry::Logical => BasisKind::Logical,
            BasisEntry::ZeroModes => BasisKind::ZeroModes,
            BasisEntry::ZeroModesEven => BasisKind::ZeroModesParity(false),
            BasisEntry::ZeroModesOdd => BasisKind::ZeroModesParity(true),
        };
        Basis::new(kind, self.schedule.qubits)
    }

    pub fn propagate_options(&self) -> PropagateOptions {
        PropagateOptions {
            dt: self.run.dt,
            trace_every: self.run.trace_every,
            trace_levels: self.run.trace_levels,
        }
    }

    /// Explicit logical target, or `None` for `auto`.
    pub fn target_unitary(&self) -> Result<Option<CMat>, SimError> {
        let n = self.schedule.qubits as usize;
        let name = self.schedule.target.trim();
        let bad = || SimError::Config(format!("[schedule] unknown target {name:?}"));
        let needs_two = || {
            if n < 2 {
                Err(SimError::Config(format!("[schedule] target {name:?} needs two qubits")))
            } else {
                Ok(())
            }
        };
        Ok(match name.to_ascii_lowercase().as_str() {
            "auto" => None,
            "identity" => Some(CMat::identity(1 << n, 1 << n)),
            "cnot" => {
                needs_two()?;
                Some(cnot(0, 1, n))
            }
            "cz" => {
                needs_two()?;
                Some(cz(0, 1, n))
            }
            _ => {
                let (g, q) = name.split_once(':').ok_or_else(bad)?;
                let q: usize = q.trim().parse().map_err(|_| bad())?;
                if q == 0 || q > n {
                    return Err(SimError::Config(format!("[schedule] target qubit {q} outside 1..={n}")));
                }
                let (_, m) = single_qubit_gates().into_iter().find(|(k, _)| *k == g.trim()).ok_or_else(bad)?;
                Some(embed_single(&m, q - 1, n))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[schedule]
qubits = 2

[[schedule.event]]
type = "project_pair"
labels = [4, 5]

[[schedule.event]]
type = "braid"
labels = [1, 2]

[[schedule.event]]
type = "project_quad"
qubit = 1
"#;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(cfg.run.dt, 0.05);
        assert_eq!(cfg.network.arm_len, DeviceParams::default().arm_len);
        let s = cfg.schedule().unwrap();
        assert_eq!(s.events.len(), 3);
        assert_eq!(s.events[0], Event::ProjectPair { a: 4, b: 5, outcome: OutcomePolicy::Forced(1) });
        assert_eq!(cfg.basis().len(), 4);
    }

    #[test]
    fn derived_cells_follow_the_braids() {
        let dev = RunConfig::from_toml(BASE).unwrap().device().unwrap();
        assert_eq!(dev.n_majoranas(), 8);
        let junctions: Vec<_> = dev.cells.iter().filter(|c| c.spec.kind == CellKind::Junction).collect();
        assert_eq!(junctions.len(), 1);
        assert_eq!(junctions[0].spec.labels, (1, 2));
        assert!(dev.disorder.is_none());
    }

    #[test]
    fn dangling_qubit_names_the_event() {
        let text = BASE.replace("qubit = 1", "qubit = 3");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("event 2"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_context() {
        let err = RunConfig::from_toml("[schedule]\nqubits = \"two\"\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = RunConfig::from_toml(&format!("{BASE}\n[run]\nstep = 0.1\n")).unwrap_err().to_string();
        assert!(err.contains("step"), "{err}");
    }

    #[test]
    fn braid_without_junction_is_rejected() {
        let text = format!(
            "{BASE}\n[network]\ncells = [{{ kind = \"wire\", labels = [1, 2] }}, {{ kind = \"wire\", labels = [3, 4] }}, \
             {{ kind = \"wire\", labels = [5, 6] }}, {{ kind = \"wire\", labels = [7, 8] }}]\n"
        );
        let err = RunConfig::from_toml(&text).unwrap().device().unwrap_err().to_string();
        assert!(err.contains("event 1") && err.contains("junction"), "{err}");
    }

    #[test]
    fn targets_parse() {
        let with = |t: &str| RunConfig::from_toml(&BASE.replace("qubits = 2", &format!("qubits = 2\ntarget = \"{t}\"")));
        assert!(with("auto").unwrap().target_unitary().unwrap().is_none());
        assert_eq!(with("cnot").unwrap().target_unitary().unwrap().unwrap(), cnot(0, 1, 2));
        assert!(with("sqrt_X:2").unwrap().target_unitary().unwrap().is_some());
        assert!(with("sqrt_X:3").is_err());
        assert!(with("toffoli").is_err());
    }

    #[test]
    fn disorder_is_attached() {
        let text = format!("{BASE}\n[disorder]\nseed = 3\namplitude = 0.2\n");
        let dev = RunConfig::from_toml(&text).unwrap().device().unwrap();
        assert_eq!(dev.disorder, Some(DisorderSpec { seed: 3, amplitude: 0.2 }));
    }

    #[test]
    fn shipped_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let mut n = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "toml") {
                RunConfig::load(&path).unwrap().device().unwrap();
                n += 1;
            }
        }
        assert!(n >= 5);
    }
}
