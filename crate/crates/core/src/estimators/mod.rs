//! ALDi score producers.
//!
//! All of them implement [`Estimator`], which scores a batch of sentences in
//! order. Estimators backed by side files (sentence-DI labels, token tags)
//! align to the batch by position.

mod binary;
mod cmi;
mod external;
mod lexicon;

use serde::Serialize;

pub use binary::{binary_di_score, read_label_file, BinaryDiEstimator, DiLabel};
pub use cmi::{cmi_score, read_tag_file, CmiEstimator, TokenTag, TokenTagSequence};
pub use external::{external_score, ExternalEstimator, ExternalScorerConfig};
pub use lexicon::{build_lexicon, lexicon_oov, lexicon_score, Lexicon, LexiconBuilder, LexiconEstimator};

#[derive(Debug, thiserror::Error)]
pub enum EstimatorError {
    #[error("sentence {index} is empty after normalization")]
    EmptySentence { index: usize },
    #[error("line {line}: unknown {kind} {value:?}")]
    UnknownLabel {
        line: usize,
        kind: &'static str,
        value: String,
    },
    #[error("{what}: expected {expected} entries, got {got}")]
    Misaligned {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("external scorer returned {got} scores for {expected} sentences")]
    Protocol { expected: usize, got: usize },
    #[error("external scorer output line {line}: {text:?} is not a finite decimal")]
    Parse { line: usize, text: String },
    #[error("external scorer exited with {status}: {stderr}")]
    ScorerFailed { status: String, stderr: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A dialectness score in [0, 1] and the estimator that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AldiScore {
    pub value: f64,
    pub estimator_id: String,
}

impl AldiScore {
    /// Clamps into [0, 1].
    pub fn clipped(value: f64, estimator_id: &str) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            estimator_id: estimator_id.to_owned(),
        }
    }
}

pub trait Estimator {
    fn id(&self) -> &str;

    /// One score per sentence, same order.
    fn score_batch(&self, sentences: &[String]) -> Result<Vec<AldiScore>, EstimatorError>;
}

impl<E: Estimator + ?Sized> Estimator for Box<E> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn score_batch(&self, sentences: &[String]) -> Result<Vec<AldiScore>, EstimatorError> {
        (**self).score_batch(sentences)
    }
}

fn check_aligned(what: &'static str, expected: usize, got: usize) -> Result<(), EstimatorError> {
    if expected == got {
        Ok(())
    } else {
        Err(EstimatorError::Misaligned {
            what,
            expected,
            got,
        })
    }
}
