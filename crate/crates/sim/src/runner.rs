//! Executes a configuration on one backend.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use majorana_core::bdg::SpectrumProbe;
use majorana_core::device::Device;
use majorana_core::evolution::TracePoint;
use majorana_core::logical::identify_gate;
use majorana_core::protocol::{
    compile, exact_device_transition, gate_fidelity, ideal_transition_matrix, prepare_pfaffian, sample_outcomes,
    stabilizer_transition_matrix, Event, OutcomePolicy, Schedule, TransitionMatrix,
};
use majorana_core::{CMat, Error as CoreError, C64};
use rayon::prelude::*;

use crate::config::{BasisEntry, RunConfig};
use crate::error::SimError;
use crate::results::{encode_entries, OutcomeRecord, Real, RunResult, Telemetry, Timestamp, SCHEMA};

/// Largest device the exact many-body oracle accepts (24 Majoranas).
pub const EXACT_MAX_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Oracle {
    Pfaffian,
    Exact,
    Stabilizer,
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Oracle::Pfaffian => "pfaffian",
            Oracle::Exact => "exact",
            Oracle::Stabilizer => "stabilizer",
        })
    }
}

impl FromStr for Oracle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pfaffian" => Ok(Oracle::Pfaffian),
            "exact" => Ok(Oracle::Exact),
            "stabilizer" => Ok(Oracle::Stabilizer),
            _ => Err(format!("unknown oracle {s:?} (pfaffian, exact, stabilizer)")),
        }
    }
}

pub struct RunOutput {
    pub result: RunResult,
    pub trace: Vec<TracePoint>,
    /// Set when the run finished but broke a numerical tolerance.
    pub tolerance_failure: Option<String>,
}

pub struct ValidationReport {
    pub n_zero: usize,
    pub n_majoranas: u32,
    pub n_sites: usize,
    pub probe: SpectrumProbe,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn render(&self) -> String {
        let mut s = format!("ok, {} zero modes detected\n", self.n_zero);
        for w in &self.warnings {
            s += &format!("warning: {w}\n");
        }
        s
    }
}

/// Schema checks plus a t = 0 spectrum probe of the device.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport, SimError> {
    let schedule = cfg.schedule()?;
    let device = cfg.device()?;
    let system = device.system(device.program().finish())?;
    let probe = system.spectrum_probe(0.0, None)?;
    let mut warnings = Vec::new();
    let need = device.n_majoranas() as usize;
    if probe.n_zero != need {
        let braids = schedule.events.iter().filter(|e| matches!(e, Event::Braid { .. })).count();
        warnings.push(format!(
            "{} zero modes, the schedule needs {need}{}",
            probe.n_zero,
            if braids > 0 { format!(" for {braids} requested braid(s)") } else { String::new() }
        ));
    }
    Ok(ValidationReport {
        n_zero: probe.n_zero,
        n_majoranas: device.n_majoranas(),
        n_sites: device.n_sites(),
        probe,
        warnings,
    })
}

/// Concrete outcomes for every projection, with ideal Born probabilities.
fn resolve(cfg: &RunConfig, schedule: &Schedule, seed: u64) -> Result<(Schedule, Vec<OutcomeRecord>), SimError> {
    let sampled = schedule
        .events
        .iter()
        .any(|e| matches!(e.projection(), Some((_, OutcomePolicy::Sampled))));
    let drawn = match sample_outcomes(schedule, cfg.run.input, seed) {
        Ok(d) => Some(d),
        Err(e) if sampled => return Err(e.into()),
        // Forced schedules run even where the ideal map cannot price them.
        Err(_) => None,
    };
    let Some(d) = drawn else {
        return Ok((schedule.clone(), Vec::new()));
    };
    let events: Vec<usize> = schedule
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.projection().is_some())
        .map(|(k, _)| k)
        .collect();
    let records = events
        .iter()
        .zip(d.outcomes.iter().zip(&d.probabilities))
        .map(|(&event, (&outcome, &p))| OutcomeRecord { event, outcome, probability: Real(p) })
        .collect();
    Ok((d.resolved, records))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, SimError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Io(format!("cannot start worker pool: {e}")))
}

pub fn execute(cfg: &RunConfig, oracle: Oracle, seed: Option<u64>, workers: usize) -> Result<RunOutput, SimError> {
    let started = Instant::now();
    let seed = seed.unwrap_or(cfg.run.seed);
    let schedule = cfg.schedule()?;
    let basis = cfg.basis();
    let (resolved, outcomes) = resolve(cfg, &schedule, seed)?;
    let mut telemetry = Telemetry {
        n_majoranas: schedule.n_majoranas(),
        projections: resolved.projection_count(),
        amplitudes: basis.len() * basis.len(),
        ..Telemetry::default()
    };
    let mut trace = Vec::new();
    let mut tolerance_failure = None;

    let t = match oracle {
        Oracle::Stabilizer => {
            if cfg.run.basis != BasisEntry::Logical {
                return Err(SimError::Config(String::from("the stabilizer oracle needs basis = \"logical\"")));
            }
            telemetry.branch_count = 1;
            stabilizer_transition_matrix(&resolved)?
        }
        Oracle::Exact => {
            let device = cfg.device()?;
            if device.n_sites() > EXACT_MAX_SITES {
                return Err(SimError::Config(format!(
                    "the exact oracle handles at most {} Majorana-equivalent modes, the device has {}",
                    2 * EXACT_MAX_SITES,
                    2 * device.n_sites()
                )));
            }
            fill_device(&mut telemetry, &device, cfg);
            let run = compile(&resolved, &device, cfg.run.dt)?;
            telemetry.branch_count = 1;
            exact_device_transition(&run, &basis, &cfg.propagate_options())?
        }
        Oracle::Pfaffian => {
            let device = cfg.device()?;
            fill_device(&mut telemetry, &device, cfg);
            let run = compile(&resolved, &device, cfg.run.dt)?;
            let prepared = prepare_pfaffian(&run, &cfg.propagate_options())?;
            let d = &prepared.diagnostics;
            telemetry.branch_count = prepared.branch_count();
            telemetry.max_unitarity_residual = Some(Real(d.max_unitarity_residual));
            telemetry.blocks = Some([d.n_empty, d.n_paired, d.n_occupied]);
            if d.max_unitarity_residual > cfg.run.tol {
                tolerance_failure = Some(format!(
                    "unitarity residual {:e} exceeds tol {:e}",
                    d.max_unitarity_residual, cfg.run.tol
                ));
            }
            trace = d.trace.clone();
            let n = basis.len();
            let cells: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
            let values: Vec<C64> = pool(workers)?.install(|| {
                cells
                    .par_iter()
                    .map(|&(r, c)| prepared.amplitude(&basis, r, c))
                    .collect::<Result<Vec<_>, CoreError>>()
            })?;
            TransitionMatrix { labels: basis.labels(), entries: CMat::from_row_slice(n, n, &values) }
        }
    };

    let (target_name, fidelity) = match cfg.target_unitary()? {
        Some(u) => (cfg.schedule.target.clone(), gate_fidelity(&t, &u).ok()),
        None => {
            let ideal = ideal_transition_matrix(&resolved, &basis).ok();
            let f = ideal.and_then(|i| gate_fidelity(&t, &i.entries).ok());
            (String::from("auto"), f)
        }
    };
    let gate = if cfg.run.basis == BasisEntry::Logical { identify_gate(&t.entries) } else { None };

    let result = RunResult {
        schema: String::from(SCHEMA),
        timestamp: Timestamp {
            utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            runtime_s: Real(started.elapsed().as_secs_f64()),
        },
        oracle: oracle.to_string(),
        seed,
        n_qubits: schedule.n_qubits,
        basis: t.labels.clone(),
        entries: encode_entries(&t.entries),
        outcomes,
        target: target_name,
        fidelity: fidelity.map(Real),
        gate,
        telemetry,
    };
    Ok(RunOutput { result, trace, tolerance_failure })
}

fn fill_device(t: &mut Telemetry, device: &Device, cfg: &RunConfig) {
    t.n_sites = device.n_sites();
    t.dt = Some(Real(cfg.run.dt));
}

/// CSV spectrum trace: time, unitarity residual, lowest |E| levels.
pub fn write_trace<W: std::io::Write>(out: W, trace: &[TracePoint]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    let levels = trace.iter().map(|p| p.lowest_abs_energies.len()).max().unwrap_or(0);
    let mut header = vec![String::from("t"), String::from("unitarity_residual")];
    header.extend((0..levels).map(|k| format!("e{k}")));
    let io = |e: csv::Error| SimError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for p in trace {
        let mut row = vec![format!("{:.16e}", p.t), format!("{:.16e}", p.unitarity_residual)];
        row.extend(p.lowest_abs_energies.iter().map(|e| format!("{e:.16e}")));
        row.resize(levels + 2, String::new());
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
