use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid strategy counts: multiplicities sum to {sum}, expected {expected}")]
    InvalidCounts { sum: u64, expected: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("enumeration of {count} multisets exceeds cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("unsupported setting count m={0}; witnesses are defined for even m")]
    UnsupportedSettingCount(usize),

    #[error("{name}={value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("root solver failed: {0}")]
    Convergence(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no violation: {0}")]
    NoViolation(String),

    #[error("bound {0} admits no finite run count")]
    Unbounded(&'static str),

    #[error("no crossover: right-hand side {rhs} is below the infimum 1 of (1-e)/(e ln(1/e))")]
    NoCrossover { rhs: f64 },

    #[error("invalid source model: {0}")]
    Model(String),
}

impl BellError {
    /// Short machine-readable code, used by the command-line frontend.
    pub fn code(&self) -> &'static str {
        match self {
            BellError::InvalidScenario(_) => "invalid_scenario",
            BellError::InvalidCounts { .. } => "invalid_counts",
            BellError::DimensionMismatch { .. } => "dimension_mismatch",
            BellError::EnumerationTooLarge { .. } => "enumeration_too_large",
            BellError::UnsupportedSettingCount(_) => "unsupported_setting_count",
            BellError::Domain { .. } => "domain",
            BellError::Convergence(_) => "convergence",
            BellError::Infeasible(_) => "infeasible",
            BellError::NoViolation(_) => "no_violation",
            BellError::Unbounded(_) => "unbounded",
            BellError::NoCrossover { .. } => "no_crossover",
            BellError::Model(_) => "model",
        }
    }

    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        BellError::Domain {
            name,
            value,
            domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, BellError>;
