//! Summary metrics: ROUGE-1/2/L and critical-information completeness.

mod cic;
mod report;
mod rouge;

use thiserror::Error;

use crate::model::ModelError;

pub use cic::{cic, CicScore, SlotValueSet, UNSPECIFIED_DOMAIN};
pub use report::{
    evaluate_model, evaluate_pairs, score_pair, Candidate, EvalPair, MetricReport, ModelSummarizer, PairScores, ReferenceSummarizer,
    RougeSummary, Summarizer, REPORT_VERSION,
};
pub use rouge::{rouge_l, rouge_n, Prf};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("metric contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type EvalResult<T> = Result<T, EvalError>;
