use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A requested parity outcome contradicts the stabilizer group.
    ForcedOutcomeMismatch { forced: i8, requested: i8 },
    /// A generator anticommutes with one of the layout's parity constraints.
    NotInLogicalSubspace { generator: String, constraint: String },
    /// A measurement would reveal logical information.
    LogicalMeasurement(String),
    LabelOutOfRange { label: u32, n_majoranas: u32 },
    InvalidMonomial(String),
    /// The Fock space would exceed the oracle's size cap.
    SpaceTooLarge { n_majoranas: u32 },
    ParticleHoleViolation { residual: f64 },
    NotHermitian { residual: f64 },
    /// No parameter schedule covers the requested time.
    ScheduleGap { t: f64 },
    InvalidSchedule(String),
    UnitarityLoss { residual: f64 },
    CanonicityViolation { residual: f64 },
    /// Vacua are numerically orthogonal.
    VacuumUnderflow { y_squared: f64 },
    BasisOutsideZeroSector { state: usize },
    QubitNotSparse { qubit: usize },
    ZeroProbabilityOutcome { event: usize },
    DimensionMismatch { expected: usize, found: usize },
    Numerical(String),
    InvalidDevice(String),
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ForcedOutcomeMismatch { forced, requested } => write!(
                f,
                "parity outcome is fixed to {forced:+} by the stabilizer group, requested {requested:+}"
            ),
            Error::NotInLogicalSubspace {
                generator,
                constraint,
            } => write!(
                f,
                "state is not in the logical subspace: {generator} anticommutes with {constraint}"
            ),
            Error::LogicalMeasurement(p) => {
                write!(f, "measuring {p} would reveal logical information")
            }
            Error::LabelOutOfRange { label, n_majoranas } => {
                write!(f, "Majorana label {label} outside 1..={n_majoranas}")
            }
            Error::InvalidMonomial(s) => write!(f, "invalid monomial: {s}"),
            Error::SpaceTooLarge { n_majoranas } => {
                write!(f, "{n_majoranas} Majoranas exceed the exact-oracle cap of 24")
            }
            Error::ParticleHoleViolation { residual } => {
                write!(f, "BdG matrix violates particle-hole symmetry (residual {residual:e})")
            }
            Error::NotHermitian { residual } => {
                write!(f, "matrix is not Hermitian (residual {residual:e})")
            }
            Error::ScheduleGap { t } => write!(f, "no schedule defined at t = {t}"),
            Error::InvalidSchedule(s) => write!(f, "invalid schedule: {s}"),
            Error::UnitarityLoss { residual } => {
                write!(f, "propagator lost unitarity (residual {residual:e})")
            }
            Error::CanonicityViolation { residual } => write!(
                f,
                "Bogoliubov pair is not canonical (residual {residual:e})"
            ),
            Error::VacuumUnderflow { y_squared } => {
                write!(f, "vacuum overlap underflow (y^2 = {y_squared:e})")
            }
            Error::BasisOutsideZeroSector { state } => {
                write!(f, "basis state {state} occupies a non-zero-mode quasiparticle")
            }
            Error::QubitNotSparse { qubit } => write!(f, "qubit {qubit} is not sparse-encoded"),
            Error::ZeroProbabilityOutcome { event } => {
                write!(f, "forced outcome of event {event} has zero probability")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Numerical(s) => write!(f, "numerical failure: {s}"),
            Error::InvalidDevice(s) => write!(f, "invalid device: {s}"),
            Error::Parse(s) => write!(f, "parse error: {s}"),
        }
    }
}

impl core::error::Error for Error {}
