use majorana_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(String),
}

impl SimError {
    /// Process exit code: 1 for configuration and IO problems, 2 for
    /// numerical tolerance failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Numerical(_) => 2,
            SimError::Config(_) | SimError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for SimError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ParticleHoleViolation { .. }
            | CoreError::NotHermitian { .. }
            | CoreError::UnitarityLoss { .. }
            | CoreError::CanonicityViolation { .. }
            | CoreError::VacuumUnderflow { .. }
            | CoreError::Numerical(_) => SimError::Numerical(e.to_string()),
            other => SimError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}
