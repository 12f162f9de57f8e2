//! Result JSON and the comparison report.
//!
//! Every float is written with 17 significant digits, so a value read back
//! is the value that was written. Wall-clock fields live under `timestamp`;
//! everything else is a pure function of config, oracle and seed.

use std::path::Path;
use std::str::FromStr;

use majorana_core::protocol::{align_global_phase, TransitionMatrix};
use majorana_core::{CMat, C64};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SimError;

pub const SCHEMA: &str = "majorana-sim/result/1";

/// f64 serialized as `{:.16e}`; non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n = serde_json::Number::from_str(&format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Real(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub utc: String,
    pub runtime_s: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub event: usize,
    pub outcome: i8,
    pub probability: Real,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Telemetry {
    pub n_sites: usize,
    pub n_majoranas: u32,
    pub dt: Option<Real>,
    pub projections: usize,
    /// Vacuum expectations evaluated per amplitude.
    pub branch_count: usize,
    pub amplitudes: usize,
    pub max_unitarity_residual: Option<Real>,
    /// Bloch–Messiah block sizes (empty, paired, occupied).
    pub blocks: Option<[usize; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema: String,
    pub timestamp: Timestamp,
    pub oracle: String,
    pub seed: u64,
    pub n_qubits: u32,
    pub basis: Vec<String>,
    /// Row-major T_mn as [re, im].
    pub entries: Vec<Vec<[Real; 2]>>,
    /// Resolved outcome per projection with its ideal Born probability on
    /// the configured input state, when available.
    pub outcomes: Vec<OutcomeRecord>,
    pub target: String,
    pub fidelity: Option<Real>,
    pub gate: Option<String>,
    pub telemetry: Telemetry,
}

impl RunResult {
    pub fn transition(&self) -> Result<TransitionMatrix, SimError> {
        let d = self.basis.len();
        if self.entries.len() != d || self.entries.iter().any(|r| r.len() != d) {
            return Err(SimError::Config(format!("entries are not {d}×{d}")));
        }
        let entries = CMat::from_fn(d, d, |r, c| {
            let [re, im] = self.entries[r][c];
            C64::new(re.0, im.0)
        });
        Ok(TransitionMatrix { labels: self.basis.clone(), entries })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let r: RunResult = serde_json::from_str(text).map_err(|e| SimError::Config(format!("bad result JSON: {e}")))?;
        if r.schema != SCHEMA {
            return Err(SimError::Config(format!("unknown result schema {:?}", r.schema)));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            SimError::Config(m) => SimError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

pub fn encode_entries(t: &CMat) -> Vec<Vec<[Real; 2]>> {
    (0..t.nrows())
        .map(|r| (0..t.ncols()).map(|c| [Real(t[(r, c)].re), Real(t[(r, c)].im)]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    /// max |a_mn − b_mn| as stored.
    pub max_deviation: f64,
    /// The same after removing the best global phase from b.
    pub max_deviation_phase_aligned: f64,
    /// |tr(b†a)|² / (‖a‖²‖b‖²) minus one; zero iff a ∝ b.
    pub fidelity_delta: f64,
    /// Difference of the declared-target fidelities, when both exist.
    pub target_fidelity_delta: Option<f64>,
}

impl CompareReport {
    /// Transition matrices are defined up to a global phase; the tolerance
    /// applies to the phase-aligned deviation.
    pub fn within(&self, tol: f64) -> bool {
        self.max_deviation_phase_aligned <= tol
    }

    pub fn render(&self, tol: f64) -> String {
        let mut s = format!(
            "max |ΔT| = {:.3e}\nmax |ΔT| (phase aligned) = {:.3e}\nfidelity delta = {:.3e}\n",
            self.max_deviation, self.max_deviation_phase_aligned, self.fidelity_delta
        );
        if let Some(d) = self.target_fidelity_delta {
            s += &format!("target fidelity delta = {d:.3e}\n");
        }
        s += &format!("{} (tol {tol:e})\n", if self.within(tol) { "within tolerance" } else { "EXCEEDS tolerance" });
        s
    }
}

pub fn compare(a: &RunResult, b: &RunResult) -> Result<CompareReport, SimError> {
    if a.basis != b.basis {
        return Err(SimError::Config(format!("basis mismatch: {:?} vs {:?}", a.basis, b.basis)));
    }
    let ta = a.transition()?;
    let tb = b.transition()?;
    let max_deviation = (&ta.entries - &tb.entries).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let (_, aligned) = align_global_phase(&ta.entries, &tb.entries);
    let na = ta.entries.norm_squared();
    let nb = tb.entries.norm_squared();
    let fidelity = if na > 0.0 && nb > 0.0 {
        (tb.entries.adjoint() * &ta.entries).trace().norm_sqr() / (na * nb)
    } else {
        f64::from(u8::from(na == nb))
    };
    let target_fidelity_delta = match (a.fidelity, b.fidelity) {
        (Some(x), Some(y)) => Some(x.0 - y.0),
        _ => None,
    };
    Ok(CompareReport {
        max_deviation,
        max_deviation_phase_aligned: aligned,
        fidelity_delta: fidelity - 1.0,
        target_fidelity_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(entries: CMat) -> RunResult {
        RunResult {
            schema: String::from(SCHEMA),
            timestamp: Timestamp { utc: String::from("2026-01-01T00:00:00Z"), runtime_s: Real(0.25) },
            oracle: String::from("pfaffian"),
            seed: 1,
            n_qubits: 1,
            basis: vec![String::from("00"), String::from("11")],
            entries: encode_entries(&entries),
            outcomes: vec![OutcomeRecord { event: 0, outcome: 1, probability: Real(0.5) }],
            target: String::from("auto"),
            fidelity: Some(Real(1.0 - 1e-12)),
            gate: None,
            telemetry: Telemetry::default(),
        }
    }

    fn matrix() -> CMat {
        CMat::from_row_slice(2, 2, &[C64::new(0.6, 0.1), C64::new(-0.2, 0.7), C64::new(1.0 / 3.0, 0.0), C64::new(0.0, -0.9)])
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let json = sample(matrix()).to_json();
        assert!(json.contains("3.3333333333333331e-1"), "{json}");
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = sample(matrix());
        let back = RunResult::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn identical_results_have_zero_diff() {
        let r = sample(matrix());
        let c = compare(&r, &r).unwrap();
        assert_eq!(c.max_deviation, 0.0);
        assert!(c.max_deviation_phase_aligned < 1e-15);
        assert!(c.fidelity_delta.abs() < 1e-15);
        assert!(c.within(0.0 + 1e-15));
    }

    #[test]
    fn global_phase_is_aligned_away() {
        let a = sample(matrix());
        let b = sample(matrix() * C64::from_polar(1.0, 1.1));
        let c = compare(&a, &b).unwrap();
        assert!(c.max_deviation > 0.5);
        assert!(c.max_deviation_phase_aligned < 1e-15);
        assert!(c.within(1e-12));
    }

    #[test]
    fn basis_mismatch_is_an_error() {
        let a = sample(matrix());
        let mut b = a.clone();
        b.basis[1] = String::from("10");
        assert!(matches!(compare(&a, &b), Err(SimError::Config(_))));
    }

    #[test]
    fn schema_is_checked() {
        let mut r = sample(matrix());
        r.schema = String::from("other");
        assert!(RunResult::from_json(&serde_json::to_string(&r).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn reals_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = serde_json::to_string(&Real(x)).unwrap();
            let y: Real = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(y.0.to_bits(), x.to_bits());
        }
    }
}
