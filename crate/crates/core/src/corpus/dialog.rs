use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::delex::{delexicalize_tokens, relexicalize_text};
use super::slots::SlotInventory;
use super::tokenize::is_slot_token;
use super::CorpusError;

/// Speaker role; doubles as the encoder id (user = 0, system = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    System,
}

impl Role {
    pub fn encoder_id(self) -> usize {
        match self {
            Role::User => 0,
            Role::System => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpan {
    /// Canonical slot name, without brackets.
    pub slot: String,
    pub value: String,
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub slot_spans: Vec<SlotSpan>,
}

/// Checks span ordering, bounds, and that each value matches the tokens it covers.
pub fn validate_spans(tokens: &[String], spans: &[SlotSpan]) -> Result<(), CorpusError> {
    let mut prev_end = 0;
    for (k, s) in spans.iter().enumerate() {
        if s.start >= s.end || s.end > tokens.len() {
            return Err(CorpusError::Span(format!(
                "span {k} [{}, {}) out of bounds for {} tokens",
                s.start,
                s.end,
                tokens.len()
            )));
        }
        if k > 0 && s.start < prev_end {
            return Err(CorpusError::Span(format!("span {k} overlaps or precedes span {}", k - 1)));
        }
        let surface = tokens[s.start..s.end].join(" ");
        if surface != s.value {
            return Err(CorpusError::Span(format!("span {k} value `{}` != covered text `{surface}`", s.value)));
        }
        prev_end = s.end;
    }
    Ok(())
}

impl Turn {
    pub fn validate(&self) -> Result<(), CorpusError> {
        validate_spans(&self.tokens, &self.slot_spans)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialog {
    pub id: String,
    pub turns: Vec<Turn>,
    /// Active domain names; see [`DomainInventory::multi_hot`].
    pub domains: Vec<String>,
    pub reference_summary: Vec<String>,
    pub reference_summary_delex: Vec<String>,
    /// Slot values in the lexical reference summary.
    #[serde(default)]
    pub summary_spans: Vec<SlotSpan>,
}

impl Dialog {
    pub fn validate(&self, slots: &SlotInventory) -> Result<(), CorpusError> {
        let bad = |msg: String| CorpusError::Schema { id: self.id.clone(), msg };
        if self.domains.is_empty() {
            return Err(bad("no active domain".into()));
        }
        for (i, t) in self.turns.iter().enumerate() {
            let expect = if i % 2 == 0 { Role::User } else { Role::System };
            if t.role != expect {
                return Err(bad(format!("turn {i} should be {expect:?}")));
            }
            t.validate().map_err(|e| bad(format!("turn {i}: {e}")))?;
            for s in &t.slot_spans {
                if !slots.contains(&s.slot) {
                    return Err(bad(format!("turn {i}: slot `{}` not in inventory", s.slot)));
                }
            }
        }
        validate_spans(&self.reference_summary, &self.summary_spans).map_err(|e| bad(format!("summary: {e}")))?;
        let (delex, _) = delexicalize_tokens(&self.reference_summary, &self.summary_spans, Role::User)
            .map_err(|e| bad(format!("summary: {e}")))?;
        if delex != self.reference_summary_delex {
            return Err(bad("delexicalized summary does not match summary spans".into()));
        }
        for tok in self.reference_summary_delex.iter().filter(|t| is_slot_token(t)) {
            let name = &tok[1..tok.len() - 1];
            if !slots.contains(name) {
                return Err(bad(format!("summary slot `{tok}` not in inventory")));
            }
        }
        Ok(())
    }

    /// Lexical summary recovered from the delexicalized one.
    pub fn relexicalized_summary(&self) -> Vec<String> {
        let (_, table) = delexicalize_tokens(&self.reference_summary, &self.summary_spans, Role::User)
            .expect("validated summary spans");
        relexicalize_text(&self.reference_summary_delex, &table).0
    }
}

/// Ordered domain names defining the multi-hot label layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainInventory(pub Vec<String>);

impl DomainInventory {
    pub fn multiwoz() -> Self {
        DomainInventory(
            ["attraction", "hospital", "hotel", "police", "restaurant", "taxi", "train"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|d| d == name)
    }

    pub fn multi_hot(&self, dialog: &Dialog) -> Result<Vec<f64>, CorpusError> {
        let mut out = vec![0.0; self.len()];
        for d in &dialog.domains {
            let i = self.index(d).ok_or_else(|| CorpusError::Schema {
                id: dialog.id.clone(),
                msg: format!("domain `{d}` not in inventory {:?}", self.0),
            })?;
            out[i] = 1.0;
        }
        Ok(out)
    }
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Dialog>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Dialog = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        out.push(d);
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, dialogs: &[Dialog]) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in dialogs {
        let line = serde_json::to_string(d).expect("dialog serializes");
        writeln!(w, "{line}").map_err(|e| CorpusError::io(path, e))?;
    }
    w.flush().map_err(|e| CorpusError::io(path, e))
}
