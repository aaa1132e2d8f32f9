use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Dialog, SlotSpan, SlotTable};

/// Reference slot values grouped by domain, each value stored as its
/// normalized token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotValueSet {
    pub domains: BTreeMap<String, BTreeSet<(String, Vec<String>)>>,
}

/// Domain label for values whose span carries none.
pub const UNSPECIFIED_DOMAIN: &str = "all";

impl SlotValueSet {
    pub fn insert(&mut self, domain: &str, slot: &str, value: &str) {
        let toks = tokenize(value);
        if !toks.is_empty() {
            self.domains.entry(domain.to_string()).or_default().insert((slot.to_string(), toks));
        }
    }

    pub fn from_spans(spans: &[SlotSpan]) -> Self {
        let mut s = SlotValueSet::default();
        for sp in spans {
            s.insert(sp.domain.as_deref().unwrap_or(UNSPECIFIED_DOMAIN), &sp.slot, &sp.value);
        }
        s
    }

    /// Values of the reference summary.
    pub fn from_dialog(dialog: &Dialog) -> Self {
        Self::from_spans(&dialog.summary_spans)
    }

    /// Values of the slot tokens in a delexicalized summary, looked up in
    /// `table` by slot name (first entry wins), under a single domain.
    pub fn from_delex(tokens: &[String], table: &SlotTable, domain: &str) -> Self {
        let mut s = SlotValueSet::default();
        for t in tokens {
            if let Some(name) = crate::corpus::slot_name(t) {
                if let Some(e) = table.entries.iter().find(|e| e.slot == name) {
                    s.insert(domain, name, &e.value);
                }
            }
        }
        s
    }

    /// Total number of values `m` over all domains.
    pub fn len(&self) -> usize {
        self.domains.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CicScore {
    pub per_domain: BTreeMap<String, f64>,
    /// Mean over domains with at least one value; `None` when there are none.
    pub mean: Option<f64>,
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Share of reference values whose token run occurs in the candidate,
/// per domain, then averaged over domains.
pub fn cic(reference: &SlotValueSet, candidate: &[String]) -> CicScore {
    let candidate: Vec<String> = candidate.iter().flat_map(|t| tokenize(t)).collect();
    let mut per_domain = BTreeMap::new();
    for (domain, values) in &reference.domains {
        if values.is_empty() {
            continue;
        }
        let hits = values.iter().filter(|(_, v)| contains_run(&candidate, v)).count();
        per_domain.insert(domain.clone(), hits as f64 / values.len() as f64);
    }
    let mean = (!per_domain.is_empty()).then(|| per_domain.values().sum::<f64>() / per_domain.len() as f64);
    CicScore { per_domain, mean }
}
