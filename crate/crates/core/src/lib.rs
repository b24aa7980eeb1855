//! Arabic Level of Dialectness (ALDi) toolkit.
//!
//! Builds the AOC-ALDi corpus from raw crowd-annotation exports, measures
//! annotator agreement, scores sentences with lexicon / dialect-ID / code-mixing
//! baselines or an external model, and evaluates the resulting scores.

pub mod agreement;
pub mod casestudy;
pub mod dataset;
pub mod estimators;
pub mod evaluation;
pub mod ingest;
pub mod labels;
pub mod textnorm;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/dataset.md")]
    mod dataset {}
    #[doc = include_str!("../../../book/src/agreement.md")]
    mod agreement {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/casestudy.md")]
    mod casestudy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
