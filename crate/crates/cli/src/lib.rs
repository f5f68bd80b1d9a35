//! Batch driver for convergence studies: configuration, the study runner,
//! CSV and JSON output and rate fitting.

pub mod config;
pub mod rates;
pub mod run;
pub mod table;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("solver failure: {0}")]
    Solver(#[source] stvem::StvemError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("rate fit: {0}")]
    Fit(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for solver
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Solver(_) => 3,
            _ => 1,
        }
    }
}

impl From<stvem::StvemError> for CliError {
    fn from(e: stvem::StvemError) -> Self {
        match e {
            stvem::StvemError::InvalidParameter { field, reason } => Self::Config { field, reason },
            stvem::StvemError::Io(e) => Self::Io(e),
            other => Self::Solver(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stvem::StvemError;

    #[test]
    fn exit_codes() {
        let slab = CliError::from(StvemError::StepFailed {
            step: 4,
            source: Box::new(StvemError::SingularSlab { slab: 3 }),
        });
        assert_eq!(slab.exit_code(), 3);
        let msg = slab.to_string();
        assert!(msg.contains("step 4") && msg.contains("slab 3"), "{msg}");
        assert_eq!(CliError::from(StvemError::invalid("theta", "bad")).exit_code(), 2);
        assert_eq!(CliError::from(StvemError::Io(std::io::Error::other("x"))).exit_code(), 1);
    }
}
