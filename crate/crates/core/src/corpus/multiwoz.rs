//! Conversion of MultiWOZ-style JSON (dialog id → {goal, log}) into [`Dialog`]s.
//!
//! The crowd-worker instruction in `goal.message` becomes the reference
//! summary. Slot spans come from matching belief-state and goal values
//! (plus `span_info` values when present) against the tokenized text.

use std::collections::BTreeSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::delex::delexicalize_tokens;
use super::dialog::{Dialog, DomainInventory, Role, SlotSpan, Turn};
use super::slots::CanonicalizationTable;
use super::tokenize::tokenize;
use super::CorpusError;

const IGNORED_VALUES: [&str; 8] =
    ["", "not mentioned", "none", "dontcare", "dont care", "don't care", "do n't care", "?"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        SplitSizes { train: 8438, valid: 1000, test: 1000 }
    }
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }

    /// Parses `train,valid,test`.
    pub fn parse(s: &str) -> Result<Self, CorpusError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.parse::<usize>()).collect();
        match nums.as_deref() {
            Ok([train, valid, test]) => Ok(SplitSizes { train: *train, valid: *valid, test: *test }),
            _ => Err(CorpusError::Config(format!("split sizes must be `train,valid,test`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Splits {
    pub train: Vec<Dialog>,
    pub valid: Vec<Dialog>,
    pub test: Vec<Dialog>,
}

/// Records left out of the conversion, with reasons.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionReport {
    /// Missing summary or domain labels.
    pub skipped: Vec<(String, String)>,
    /// Malformed annotations.
    pub rejected: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
struct ValueEntry {
    slot: String,
    domain: String,
    tokens: Vec<String>,
}

enum RecordError {
    Skip(String),
    Reject(String),
}

pub fn convert_multiwoz(raw: &Value, table: &CanonicalizationTable) -> Result<(Vec<Dialog>, ConversionReport), CorpusError> {
    let obj = raw
        .as_object()
        .ok_or_else(|| CorpusError::Config("MultiWOZ input must be a JSON object keyed by dialog id".into()))?;
    let domains = DomainInventory::multiwoz();
    let mut ids: Vec<&String> = obj.keys().collect();
    ids.sort();
    let mut out = Vec::new();
    let mut report = ConversionReport::default();
    for id in ids {
        let clean_id = id.trim_end_matches(".json").to_string();
        match convert_record(&clean_id, &obj[id.as_str()], table, &domains) {
            Ok(d) => out.push(d),
            Err(RecordError::Skip(why)) => {
                warn!("skipping dialog {clean_id}: {why}");
                report.skipped.push((clean_id, why));
            }
            Err(RecordError::Reject(why)) => {
                warn!("rejecting dialog {clean_id}: {why}");
                report.rejected.push((clean_id, why));
            }
        }
    }
    Ok((out, report))
}

fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_tag = false;
    for c in text.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => {
                in_tag = false;
                out.push(' ');
            }
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out
}

fn summary_text(goal: &Value) -> Option<String> {
    let text = match goal.get("message")? {
        Value::String(s) => s.clone(),
        Value::Array(parts) => parts.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(" "),
        _ => return None,
    };
    let text = strip_tags(&text);
    (!text.trim().is_empty()).then_some(text)
}

fn add_value(
    values: &mut Vec<ValueEntry>,
    table: &CanonicalizationTable,
    domain: &str,
    qualified: &str,
    value: &Value,
) {
    let Some(v) = value.as_str() else { return };
    let v = v.trim().to_lowercase();
    if IGNORED_VALUES.contains(&v.as_str()) {
        return;
    }
    let tokens = tokenize(&v);
    if tokens.is_empty() {
        return;
    }
    let slot = table.canonicalize_slot(qualified).name().to_string();
    values.push(ValueEntry { slot, domain: domain.to_string(), tokens });
}

fn collect_slot_map(values: &mut Vec<ValueEntry>, table: &CanonicalizationTable, domain: &str, map: &Value, book: bool) {
    let Some(obj) = map.as_object() else { return };
    for (k, v) in obj {
        if k == "booked" || k == "invalid" || k == "pre_invalid" {
            continue;
        }
        let qualified = if book { format!("{domain}-book-{k}") } else { format!("{domain}-{k}") };
        add_value(values, table, domain, &qualified, v);
    }
}

/// Greedy left-to-right, longest-value-first matching of value token runs.
fn find_spans(tokens: &[String], values: &[ValueEntry]) -> Vec<SlotSpan> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let hit = values.iter().find(|v| tokens[i..].starts_with(&v.tokens));
        match hit {
            Some(v) => {
                spans.push(SlotSpan {
                    slot: v.slot.clone(),
                    value: v.tokens.join(" "),
                    start: i,
                    end: i + v.tokens.len(),
                    domain: Some(v.domain.clone()),
                });
                i += v.tokens.len();
            }
            None => i += 1,
        }
    }
    spans
}

fn convert_record(
    id: &str,
    rec: &Value,
    table: &CanonicalizationTable,
    inventory: &DomainInventory,
) -> Result<Dialog, RecordError> {
    let goal = rec.get("goal").ok_or_else(|| RecordError::Skip("missing goal".into()))?;
    let log = rec
        .get("log")
        .and_then(Value::as_array)
        .ok_or_else(|| RecordError::Reject("missing or malformed log".into()))?;
    let summary = summary_text(goal).ok_or_else(|| RecordError::Skip("missing summary instruction".into()))?;
    let domains: Vec<String> = inventory
        .names()
        .iter()
        .filter(|d| goal.get(d.as_str()).and_then(Value::as_object).is_some_and(|o| !o.is_empty()))
        .cloned()
        .collect();
    if domains.is_empty() {
        return Err(RecordError::Skip("no domain labels".into()));
    }

    let mut values = Vec::new();
    for d in &domains {
        let g = &goal[d.as_str()];
        for key in ["info", "fail_info"] {
            if let Some(m) = g.get(key) {
                collect_slot_map(&mut values, table, d, m, false);
            }
        }
        for key in ["book", "fail_book"] {
            if let Some(m) = g.get(key) {
                collect_slot_map(&mut values, table, d, m, true);
            }
        }
    }
    let mut texts = Vec::with_capacity(log.len());
    for (t, entry) in log.iter().enumerate() {
        let text = entry
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| RecordError::Reject(format!("turn {t} has no text")))?;
        texts.push(text);
        if let Some(meta) = entry.get("metadata").and_then(Value::as_object) {
            for (d, state) in meta {
                collect_slot_map(&mut values, table, d, state.get("semi").unwrap_or(&Value::Null), false);
                collect_slot_map(&mut values, table, d, state.get("book").unwrap_or(&Value::Null), true);
            }
        }
        if let Some(spans) = entry.get("span_info") {
            let spans = spans.as_array().ok_or_else(|| RecordError::Reject(format!("turn {t}: span_info is not a list")))?;
            let n_words = text.split_whitespace().count();
            for s in spans {
                let (act, slot, value, start, end) = match s.as_array().map(Vec::as_slice) {
                    Some([a, sl, v, st, en]) => (a.as_str(), sl.as_str(), v, st.as_u64(), en.as_u64()),
                    _ => return Err(RecordError::Reject(format!("turn {t}: malformed span_info entry"))),
                };
                let (Some(act), Some(slot), Some(start), Some(end)) = (act, slot, start, end) else {
                    return Err(RecordError::Reject(format!("turn {t}: malformed span_info entry")));
                };
                if start > end || end as usize >= n_words {
                    return Err(RecordError::Reject(format!(
                        "turn {t}: span [{start}, {end}] out of bounds for {n_words} words"
                    )));
                }
                let domain = act.split('-').next().unwrap_or("").to_lowercase();
                let qualified = format!("{domain}-{}", slot.to_lowercase());
                if table.lookup(&qualified).is_some() {
                    add_value(&mut values, table, &domain, &qualified, value);
                }
            }
        }
    }

    let mut seen = BTreeSet::new();
    values.retain(|v| seen.insert((v.slot.clone(), v.tokens.clone())));
    values.sort_by(|a, b| {
        b.tokens.len().cmp(&a.tokens.len()).then_with(|| a.slot.cmp(&b.slot)).then_with(|| a.tokens.cmp(&b.tokens))
    });

    let turns = texts
        .iter()
        .enumerate()
        .map(|(t, text)| {
            let tokens = tokenize(text);
            let slot_spans = find_spans(&tokens, &values);
            let role = if t % 2 == 0 { Role::User } else { Role::System };
            Turn { role, tokens, slot_spans }
        })
        .collect();
    let reference_summary = tokenize(&summary);
    let summary_spans = find_spans(&reference_summary, &values);
    let (reference_summary_delex, _) = delexicalize_tokens(&reference_summary, &summary_spans, Role::User)
        .map_err(|e| RecordError::Reject(format!("summary: {e}")))?;
    Ok(Dialog { id: id.to_string(), turns, domains, reference_summary, reference_summary_delex, summary_spans })
}

/// Partitions dialogs into train/valid/test. The order is a seeded shuffle
/// of the id-sorted input; each split is then sorted by id.
pub fn split_corpus(mut dialogs: Vec<Dialog>, sizes: SplitSizes, seed: u64) -> Result<Splits, CorpusError> {
    if sizes.total() != dialogs.len() {
        return Err(CorpusError::Config(format!(
            "split sizes {}/{}/{} do not partition {} dialogs",
            sizes.train,
            sizes.valid,
            sizes.test,
            dialogs.len()
        )));
    }
    dialogs.sort_by(|a, b| a.id.cmp(&b.id));
    dialogs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = dialogs.split_off(sizes.train + sizes.valid);
    let valid = dialogs.split_off(sizes.train);
    let mut splits = Splits { train: dialogs, valid, test };
    for s in [&mut splits.train, &mut splits.valid, &mut splits.test] {
        s.sort_by(|a, b| a.id.cmp(&b.id));
    }
    Ok(splits)
}
