use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dialog, DomainInventory, Vocabulary};
use crate::model::{summarize, DecodeStrategy, Example, ModelParams, SlotMode};
use crate::numcore::Real;

use super::cic::{cic, CicScore, SlotValueSet};
use super::rouge::{rouge_l, rouge_n, Prf};
use super::EvalResult;

pub const REPORT_VERSION: u32 = 1;

/// One reference/candidate pair in surface form.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPair {
    pub id: String,
    pub reference: Vec<String>,
    pub reference_values: SlotValueSet,
    pub candidate: Vec<String>,
    /// Slot tokens the candidate could not fill.
    pub unresolved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub id: String,
    pub rouge1: Prf,
    pub rouge2: Prf,
    pub rouge_l: Prf,
    pub cic: CicScore,
    pub unresolved: usize,
}

/// Corpus means of precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeSummary {
    fn mean<'a>(items: impl Iterator<Item = &'a Prf>) -> Self {
        let (mut s, mut n) = (RougeSummary::default(), 0usize);
        for p in items {
            s.precision += p.precision;
            s.recall += p.recall;
            s.f1 += p.f1;
            n += 1;
        }
        if n > 0 {
            let k = n as f64;
            s.precision /= k;
            s.recall /= k;
            s.f1 /= k;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub version: u32,
    pub evaluated: usize,
    pub rouge1: RougeSummary,
    pub rouge2: RougeSummary,
    pub rouge_l: RougeSummary,
    /// Mean CIC per domain over the pairs whose reference has values there.
    pub cic_per_domain: BTreeMap<String, f64>,
    /// Arithmetic mean of `cic_per_domain`.
    pub cic_mean: Option<f64>,
    pub unresolved_slots: usize,
    /// Dialogs that could not be summarized, with the reason.
    pub failed: Vec<(String, String)>,
    pub pairs: Vec<PairScores>,
}

/// ROUGE-N where a reference shorter than `n` scores 1 only against itself.
fn rouge_n_total(reference: &[String], candidate: &[String], n: usize) -> EvalResult<Prf> {
    if !reference.is_empty() && reference.len() < n {
        let v = if reference == candidate { 1.0 } else { 0.0 };
        return Ok(Prf { precision: v, recall: v, f1: v });
    }
    rouge_n(reference, candidate, n)
}

pub fn score_pair(pair: &EvalPair) -> EvalResult<PairScores> {
    Ok(PairScores {
        id: pair.id.clone(),
        rouge1: rouge_n_total(&pair.reference, &pair.candidate, 1)?,
        rouge2: rouge_n_total(&pair.reference, &pair.candidate, 2)?,
        rouge_l: rouge_l(&pair.reference, &pair.candidate)?,
        cic: cic(&pair.reference_values, &pair.candidate),
        unresolved: pair.unresolved,
    })
}

pub fn evaluate_pairs(pairs: &[EvalPair]) -> EvalResult<MetricReport> {
    let scores: Vec<PairScores> = pairs.iter().map(score_pair).collect::<Result<_, _>>()?;
    Ok(aggregate(scores, Vec::new()))
}

fn aggregate(pairs: Vec<PairScores>, failed: Vec<(String, String)>) -> MetricReport {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for p in &pairs {
        for (d, &v) in &p.cic.per_domain {
            let e = sums.entry(d.clone()).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    let cic_per_domain: BTreeMap<String, f64> = sums.into_iter().map(|(d, (s, n))| (d, s / n as f64)).collect();
    let cic_mean =
        (!cic_per_domain.is_empty()).then(|| cic_per_domain.values().sum::<f64>() / cic_per_domain.len() as f64);
    MetricReport {
        version: REPORT_VERSION,
        evaluated: pairs.len(),
        rouge1: RougeSummary::mean(pairs.iter().map(|p| &p.rouge1)),
        rouge2: RougeSummary::mean(pairs.iter().map(|p| &p.rouge2)),
        rouge_l: RougeSummary::mean(pairs.iter().map(|p| &p.rouge_l)),
        cic_per_domain,
        cic_mean,
        unresolved_slots: pairs.iter().map(|p| p.unresolved).sum(),
        failed,
        pairs,
    }
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table with scores in [0, 1] and ×100.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "evaluated {} dialogs, {} failed, {} unresolved slot tokens", self.evaluated, self.failed.len(), self.unresolved_slots);
        let _ = writeln!(s, "{:<14} {:>9} {:>9} {:>9} {:>9}", "metric", "P", "R", "F1", "F1x100");
        for (name, r) in [("rouge-1", &self.rouge1), ("rouge-2", &self.rouge2), ("rouge-l", &self.rouge_l)] {
            let _ = writeln!(s, "{:<14} {:>9.4} {:>9.4} {:>9.4} {:>9.2}", name, r.precision, r.recall, r.f1, 100.0 * r.f1);
        }
        let _ = writeln!(s, "{:<14} {:>9} {:>9}", "cic", "score", "x100");
        for (d, v) in &self.cic_per_domain {
            let _ = writeln!(s, "{:<14} {:>9.4} {:>9.2}", format!("  {d}"), v, 100.0 * v);
        }
        match self.cic_mean {
            Some(m) => {
                let _ = writeln!(s, "{:<14} {:>9.4} {:>9.2}", "  mean", m, 100.0 * m);
            }
            None => {
                let _ = writeln!(s, "{:<14} {:>9}", "  mean", "n/a");
            }
        }
        s
    }
}

/// A produced summary in surface form.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub tokens: Vec<String>,
    pub unresolved: usize,
}

pub trait Summarizer {
    fn summarize(&mut self, dialog: &Dialog) -> EvalResult<Candidate>;
}

/// Returns each dialog's own reference summary.
pub struct ReferenceSummarizer;

impl Summarizer for ReferenceSummarizer {
    fn summarize(&mut self, dialog: &Dialog) -> EvalResult<Candidate> {
        Ok(Candidate { tokens: dialog.reference_summary.clone(), unresolved: 0 })
    }
}

/// Decodes with a trained model and fills slots from attention.
pub struct ModelSummarizer<'a, T: Real> {
    pub params: &'a ModelParams<T>,
    pub vocab: &'a Vocabulary,
    pub domains: &'a DomainInventory,
    pub mode: SlotMode,
    pub strategy: DecodeStrategy,
}

impl<T: Real> Summarizer for ModelSummarizer<'_, T> {
    fn summarize(&mut self, dialog: &Dialog) -> EvalResult<Candidate> {
        let ex = Example::from_dialog(dialog, self.vocab, self.domains, self.mode)?;
        let s = summarize(self.params, &ex, self.vocab, &self.strategy)?;
        Ok(Candidate { tokens: s.surface, unresolved: s.unresolved })
    }
}

/// Summarizes every dialog and scores it against its reference. Dialogs
/// that fail to summarize are listed in the report and left out of the means.
pub fn evaluate_model<S: Summarizer>(summarizer: &mut S, dialogs: &[Dialog]) -> EvalResult<MetricReport> {
    let mut scores = Vec::new();
    let mut failed = Vec::new();
    for d in dialogs {
        match summarizer.summarize(d) {
            Ok(c) => scores.push(score_pair(&EvalPair {
                id: d.id.clone(),
                reference: d.reference_summary.clone(),
                reference_values: SlotValueSet::from_dialog(d),
                candidate: c.tokens,
                unresolved: c.unresolved,
            })?),
            Err(e) => {
                warn!("dialog {}: {e}", d.id);
                failed.push((d.id.clone(), e.to_string()));
            }
        }
    }
    Ok(aggregate(scores, failed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, SyntheticConfig};

    struct Silent;

    impl Summarizer for Silent {
        fn summarize(&mut self, _: &Dialog) -> EvalResult<Candidate> {
            Ok(Candidate { tokens: vec![], unresolved: 0 })
        }
    }

    #[test]
    fn references_score_one() {
        let dialogs = generate_synthetic_corpus(5, 12, &SyntheticConfig::standard());
        let r = evaluate_model(&mut ReferenceSummarizer, &dialogs).unwrap();
        assert_eq!(r.evaluated, 12);
        for m in [r.rouge1, r.rouge2, r.rouge_l] {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(r.cic_mean, Some(1.0));
        assert!(r.cic_per_domain.values().all(|&v| v == 1.0));
        assert!(r.to_text().contains("100.00"));
        let back: MetricReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn empty_output_scores_zero() {
        let dialogs = generate_synthetic_corpus(5, 6, &SyntheticConfig::standard());
        let r = evaluate_model(&mut Silent, &dialogs).unwrap();
        assert_eq!(r.rouge1.f1, 0.0);
        assert_eq!(r.rouge_l.f1, 0.0);
        assert_eq!(r.cic_mean, Some(0.0));
    }
}
