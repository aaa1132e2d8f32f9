use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalResult};

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(hits: usize, cand: usize, reference: usize) -> Self {
        if hits == 0 || cand == 0 {
            return Prf::default();
        }
        let precision = hits as f64 / cand as f64;
        let recall = hits as f64 / reference as f64;
        Prf { precision, recall, f1: 2.0 * precision * recall / (precision + recall) }
    }
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    for w in tokens.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Clipped n-gram overlap.
pub fn rouge_n(reference: &[String], candidate: &[String], n: usize) -> EvalResult<Prf> {
    if n == 0 {
        return Err(EvalError::Contract("ROUGE-N needs n ≥ 1".into()));
    }
    if reference.is_empty() {
        return Err(EvalError::Contract("empty reference".into()));
    }
    let r = ngrams(reference, n);
    let c = ngrams(candidate, n);
    let hits: usize = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
    let total = |m: &HashMap<&[String], usize>| m.values().sum::<usize>();
    if total(&r) == 0 {
        return Err(EvalError::Contract(format!("reference shorter than {n} tokens")));
    }
    Ok(Prf::from_counts(hits, total(&c), total(&r)))
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Longest-common-subsequence precision and recall.
pub fn rouge_l(reference: &[String], candidate: &[String]) -> EvalResult<Prf> {
    if reference.is_empty() {
        return Err(EvalError::Contract("empty reference".into()));
    }
    Ok(Prf::from_counts(lcs_len(reference, candidate), candidate.len(), reference.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn identical_is_perfect() {
        let r = t("the cat sat on the mat");
        for n in [1, 2] {
            assert_eq!(rouge_n(&r, &r, n).unwrap(), Prf { precision: 1.0, recall: 1.0, f1: 1.0 });
        }
        assert_eq!(rouge_l(&r, &r).unwrap().f1, 1.0);
    }

    #[test]
    fn hand_counts() {
        let p = rouge_n(&t("the cat sat"), &t("the cat"), 1).unwrap();
        assert_eq!(p.precision, 1.0);
        assert!((p.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.f1 - 0.8).abs() < 1e-12);
        let l = rouge_l(&t("a b c d"), &t("a c d")).unwrap();
        assert_eq!((l.precision, l.recall), (1.0, 0.75));
        assert!((l.f1 - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(lcs_len(&t("a b c d"), &t("d c b a")), 1);
    }

    #[test]
    fn clipping_and_degenerate_cases() {
        let p = rouge_n(&t("the cat"), &t("the the the"), 1).unwrap();
        assert!((p.precision - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(rouge_n(&t("a b"), &t("c d"), 1).unwrap(), Prf::default());
        assert_eq!(rouge_n(&t("a b"), &[], 2).unwrap(), Prf::default());
        assert_eq!(rouge_l(&t("a b"), &[]).unwrap(), Prf::default());
        assert!(rouge_n(&[], &t("a"), 1).is_err());
        assert!(rouge_l(&[], &t("a")).is_err());
    }
}
