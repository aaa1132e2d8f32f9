use serde::{Deserialize, Serialize};

use super::dialog::{validate_spans, Dialog, Role, SlotSpan};
use super::slots::{slot_name, slot_token};
use super::tokenize::is_slot_token;
use super::CorpusError;

/// One slot-token occurrence in a delexicalized stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotEntry {
    /// Slot name without brackets.
    pub slot: String,
    pub value: String,
    pub encoder: Role,
    /// Index of the slot token in its delexicalized stream.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotTable {
    pub entries: Vec<SlotEntry>,
}

impl SlotTable {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn for_encoder(&self, role: Role) -> SlotTable {
        SlotTable { entries: self.entries.iter().filter(|e| e.encoder == role).cloned().collect() }
    }

    /// Entry at an exact stream position.
    pub fn at(&self, encoder: Role, position: usize) -> Option<&SlotEntry> {
        self.entries.iter().find(|e| e.encoder == encoder && e.position == position)
    }
}

/// Replaces every span with its slot token. Multi-token values collapse to one token.
pub fn delexicalize_tokens(
    tokens: &[String],
    spans: &[SlotSpan],
    role: Role,
) -> Result<(Vec<String>, SlotTable), CorpusError> {
    validate_spans(tokens, spans)?;
    let mut out = Vec::with_capacity(tokens.len());
    let mut table = SlotTable::default();
    let mut i = 0;
    for s in spans {
        out.extend_from_slice(&tokens[i..s.start]);
        table.entries.push(SlotEntry { slot: s.slot.clone(), value: s.value.clone(), encoder: role, position: out.len() });
        out.push(slot_token(&s.slot));
        i = s.end;
    }
    out.extend_from_slice(&tokens[i..]);
    Ok((out, table))
}

pub fn delexicalize_turn(turn: &super::dialog::Turn) -> Result<(Vec<String>, SlotTable), CorpusError> {
    delexicalize_tokens(&turn.tokens, &turn.slot_spans, turn.role)
}

/// Slot tokens that could not be resolved, by position in the input.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelexReport {
    pub unresolved: Vec<(usize, String)>,
}

impl RelexReport {
    pub fn is_clean(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// Replaces slot tokens with surface values from `table`.
///
/// A slot token at position `j` takes the entry recorded at position `j`
/// when one exists for that slot (the table produced by delexicalizing this
/// very stream); otherwise the entry with that slot name and the earliest
/// `(encoder, position)`. Unresolvable tokens stay verbatim and are reported.
pub fn relexicalize_text(tokens: &[String], table: &SlotTable) -> (Vec<String>, RelexReport) {
    let mut out = Vec::with_capacity(tokens.len());
    let mut report = RelexReport::default();
    for (j, tok) in tokens.iter().enumerate() {
        let Some(name) = slot_name(tok).filter(|_| is_slot_token(tok)) else {
            out.push(tok.clone());
            continue;
        };
        let aligned = table.entries.iter().find(|e| e.position == j && e.slot == name);
        let entry = aligned.or_else(|| {
            table.entries.iter().filter(|e| e.slot == name).min_by_key(|e| (e.encoder, e.position))
        });
        match entry {
            Some(e) => out.extend(e.value.split(' ').map(str::to_string)),
            None => {
                report.unresolved.push((j, tok.clone()));
                out.push(tok.clone());
            }
        }
    }
    (out, report)
}

/// A dialog split into per-role streams, delexicalized, with the slot table
/// needed to restore the surface text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelexRecord {
    pub user_stream: Vec<String>,
    pub system_stream: Vec<String>,
    pub slot_table: SlotTable,
}

impl DelexRecord {
    pub fn from_dialog(dialog: &Dialog) -> Result<Self, CorpusError> {
        let mut rec = DelexRecord { user_stream: Vec::new(), system_stream: Vec::new(), slot_table: SlotTable::default() };
        for turn in &dialog.turns {
            let (toks, frag) = delexicalize_turn(turn)?;
            let stream = rec.stream_mut(turn.role);
            let offset = stream.len();
            stream.extend(toks);
            rec.slot_table
                .entries
                .extend(frag.entries.into_iter().map(|e| SlotEntry { position: e.position + offset, ..e }));
        }
        Ok(rec)
    }

    /// The same streams without delexicalization (no slot table).
    pub fn lexical(dialog: &Dialog) -> Self {
        let mut rec = DelexRecord { user_stream: Vec::new(), system_stream: Vec::new(), slot_table: SlotTable::default() };
        for turn in &dialog.turns {
            rec.stream_mut(turn.role).extend(turn.tokens.iter().cloned());
        }
        rec
    }

    pub fn stream(&self, role: Role) -> &[String] {
        match role {
            Role::User => &self.user_stream,
            Role::System => &self.system_stream,
        }
    }

    fn stream_mut(&mut self, role: Role) -> &mut Vec<String> {
        match role {
            Role::User => &mut self.user_stream,
            Role::System => &mut self.system_stream,
        }
    }

    pub fn relexicalize_stream(&self, role: Role) -> (Vec<String>, RelexReport) {
        relexicalize_text(self.stream(role), &self.slot_table.for_encoder(role))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize::tokenize;
    use crate::corpus::Turn;

    fn span(slot: &str, value: &str, start: usize, end: usize) -> SlotSpan {
        SlotSpan { slot: slot.into(), value: value.into(), start, end, domain: None }
    }

    #[test]
    fn time_example() {
        let turn = Turn { role: Role::User, tokens: tokenize("at 18:00"), slot_spans: vec![span("time", "18:00", 1, 2)] };
        let (toks, table) = delexicalize_turn(&turn).unwrap();
        assert_eq!(toks, ["at", "[time]"]);
        assert_eq!(table.entries[0].value, "18:00");
        assert_eq!(relexicalize_text(&toks, &table).0, turn.tokens);
    }

    #[test]
    fn multiword_collapses() {
        let tokens = tokenize("ask restaurant please");
        let turn = Turn { role: Role::System, tokens, slot_spans: vec![span("place_name", "ask restaurant", 0, 2)] };
        let (toks, table) = delexicalize_turn(&turn).unwrap();
        assert_eq!(toks, ["[place_name]", "please"]);
        assert_eq!(table.entries[0].value, "ask restaurant");
        assert_eq!(table.entries[0].encoder, Role::System);
        assert_eq!(relexicalize_text(&toks, &table).0, turn.tokens);
    }

    #[test]
    fn no_spans_unchanged() {
        let turn = Turn { role: Role::User, tokens: tokenize("hello there ."), slot_spans: vec![] };
        let (toks, table) = delexicalize_turn(&turn).unwrap();
        assert_eq!(toks, turn.tokens);
        assert!(table.is_empty());
    }

    #[test]
    fn overlapping_spans_rejected() {
        let turn = Turn {
            role: Role::User,
            tokens: tokenize("a b c"),
            slot_spans: vec![span("x", "a b", 0, 2), span("y", "b c", 1, 3)],
        };
        assert!(matches!(delexicalize_turn(&turn), Err(CorpusError::Span(_))));
    }

    #[test]
    fn unresolved_flagged() {
        let toks = vec!["[time]".to_string()];
        let (out, report) = relexicalize_text(&toks, &SlotTable::default());
        assert_eq!(out, toks);
        assert_eq!(report.unresolved, vec![(0, "[time]".to_string())]);
    }

    #[test]
    fn by_name_prefers_earliest() {
        let table = SlotTable {
            entries: vec![
                SlotEntry { slot: "time".into(), value: "19:00".into(), encoder: Role::System, position: 0 },
                SlotEntry { slot: "time".into(), value: "18:00".into(), encoder: Role::User, position: 7 },
            ],
        };
        let toks: Vec<String> = ["at", "[time]"].iter().map(|s| s.to_string()).collect();
        assert_eq!(relexicalize_text(&toks, &table).0, ["at", "18:00"]);
    }

    #[test]
    fn two_values_same_slot_round_trip() {
        let tokens = tokenize("leave after 17:00 arrive by 19:00");
        let turn = Turn {
            role: Role::User,
            tokens: tokens.clone(),
            slot_spans: vec![span("time", "17:00", 2, 3), span("time", "19:00", 5, 6)],
        };
        let (toks, table) = delexicalize_turn(&turn).unwrap();
        assert_eq!(relexicalize_text(&toks, &table).0, tokens);
    }
}
