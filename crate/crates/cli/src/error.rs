use std::fmt;
use std::io;
use std::path::Path;

use aldi::agreement::AgreementError;
use aldi::casestudy::CaseStudyError;
use aldi::dataset::DatasetError;
use aldi::estimators::EstimatorError;
use aldi::evaluation::EvalError;
use aldi::ingest::IngestError;

/// A failure with its process exit code: 1 I/O, 2 format or validation,
/// 3 external-scorer protocol.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Format(String),
    Protocol(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Format(_) => 2,
            CliError::Protocol(_) => 3,
        }
    }

    pub fn io_at(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// Prefixes the message with the file it came from.
    pub fn at(self, path: &Path) -> Self {
        let p = path.display();
        match self {
            CliError::Io(m) => CliError::Io(format!("{p}: {m}")),
            CliError::Format(m) => CliError::Format(format!("{p}: {m}")),
            CliError::Protocol(m) => CliError::Protocol(format!("{p}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Format(m) | CliError::Protocol(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(e) => e.into(),
                        other => CliError::Format(other.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(e) => e.into(),
            other => CliError::Format(other.to_string()),
        }
    }
}

impl From<AgreementError> for CliError {
    fn from(e: AgreementError) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Io(e) => CliError::Io(format!("estimator: {e}")),
            EstimatorError::Protocol { .. } | EstimatorError::Parse { .. } | EstimatorError::ScorerFailed { .. } => {
                CliError::Protocol(e.to_string())
            }
            other => CliError::Format(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(e) => e.into(),
            EvalError::Estimator(e) => e.into(),
            other => CliError::Format(other.to_string()),
        }
    }
}

impl From<CaseStudyError> for CliError {
    fn from(e: CaseStudyError) -> Self {
        match e {
            CaseStudyError::Io(e) => e.into(),
            CaseStudyError::Scoring { index, source } => match CliError::from(source) {
                CliError::Io(m) => CliError::Io(format!("sentence {index}: {m}")),
                CliError::Format(m) => CliError::Format(format!("sentence {index}: {m}")),
                CliError::Protocol(m) => CliError::Protocol(format!("sentence {index}: {m}")),
            },
            CaseStudyError::Csv(e) if e.is_io_error() => CliError::Io(e.to_string()),
            other => CliError::Format(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Format(e.to_string())
    }
}
