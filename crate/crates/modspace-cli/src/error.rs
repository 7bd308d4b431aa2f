//! Error-to-exit-code mapping.

use modspace::analysis::AnalysisError;
use modspace::expr::ClassifyError;
use modspace::ode::OdeError;
use modspace::phase::PhaseError;
use modspace::systems::SystemError;
use std::fmt;

pub enum CliError {
    /// Bad flags, unknown systems, unparsable definitions, missing files.
    Config(String),
    /// The numerics failed (divergence, step underflow, non-finite values).
    Numeric(String),
    /// The analyzed signal has no usable oscillation.
    NotOscillatory(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::NotOscillatory(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::NotOscillatory(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::InvalidConfig(_) | OdeError::DimensionMismatch { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::NotOscillatory(_) => CliError::NotOscillatory(e.to_string()),
            PhaseError::TooShort { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::DegenerateTerm(_) => CliError::Config(e.to_string()),
            ClassifyError::Eval(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::System(e) => e.into(),
            AnalysisError::Ode(e) => e.into(),
            AnalysisError::Phase(e) => e.into(),
            AnalysisError::Classify(e) => e.into(),
            AnalysisError::Trace(e) => match e {
                modspace::modulation::TraceError::Eval(_) => CliError::Numeric(e.to_string()),
                _ => CliError::Config(e.to_string()),
            },
            AnalysisError::Manifold(e) => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("malformed JSON artifact: {e}"))
    }
}
