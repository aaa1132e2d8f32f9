use serde::{Deserialize, Serialize};

use crate::corpus::{slot_name, Role, SlotTable, Vocabulary};
use crate::numcore::{Graph, Real};

use super::decode::{beam_decode, greedy_decode, BeamConfig, NetworkStepper};
use super::network::{classify_domains, encode_dialog, ClassifierNodes};
use super::params::ModelParams;
use super::trace::{DecoderStepTrace, DomainPrediction};
use super::{Example, ModelResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecodeStrategy {
    Greedy { max_len: usize },
    Beam(BeamConfig),
}

/// How one slot token of the output was filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotFill {
    /// Index of the slot token in the decoded template.
    pub index: usize,
    pub slot: String,
    /// `None` when no source position carries the slot.
    pub value: Option<String>,
    pub encoder: Option<Role>,
    pub position: Option<usize>,
    /// Merged attention weight of the winning position.
    pub weight: f64,
}

/// Picks the source value of `slot_token` with the highest merged attention
/// (half of each encoder's weight). Ties go to the user encoder, then to the
/// earlier position.
pub fn fill_slot_value(index: usize, slot_token: &str, trace: &DecoderStepTrace, table: &SlotTable) -> SlotFill {
    let slot = slot_name(slot_token).unwrap_or(slot_token).to_string();
    let mut best: Option<(f64, usize, usize, &str)> = None;
    for entry in table.entries.iter().filter(|e| e.slot == slot) {
        let attn = match entry.encoder {
            Role::User => &trace.user_attention,
            Role::System => &trace.system_attention,
        };
        let Some(&a) = attn.get(entry.position) else { continue };
        let key = (0.5 * a, entry.encoder.encoder_id(), entry.position);
        let better = match best {
            None => true,
            Some((w, e, p, _)) => key.0 > w || (key.0 == w && (key.1, key.2) < (e, p)),
        };
        if better {
            best = Some((key.0, key.1, key.2, &entry.value));
        }
    }
    match best {
        Some((weight, enc, position, value)) => SlotFill {
            index,
            slot,
            value: Some(value.to_string()),
            encoder: Some(if enc == 0 { Role::User } else { Role::System }),
            position: Some(position),
            weight,
        },
        None => SlotFill { index, slot, value: None, encoder: None, position: None, weight: 0.0 },
    }
}

/// A generated summary with its template and slot-fill audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub id: String,
    pub template: Vec<String>,
    pub surface: Vec<String>,
    pub fills: Vec<SlotFill>,
    pub unresolved: usize,
    pub log_prob: f64,
}

pub fn summarize<T: Real>(
    params: &ModelParams<T>,
    example: &Example,
    vocab: &Vocabulary,
    strategy: &DecodeStrategy,
) -> ModelResult<Summary> {
    let mut stepper = NetworkStepper::new(params, example)?;
    let decoded = match strategy {
        DecodeStrategy::Greedy { max_len } => greedy_decode(&mut stepper, *max_len)?,
        DecodeStrategy::Beam(cfg) => beam_decode(&mut stepper, cfg)?,
    };
    let mut template = Vec::with_capacity(decoded.tokens.len());
    let mut surface = Vec::with_capacity(decoded.tokens.len());
    let mut fills = Vec::new();
    for (i, (&id, trace)) in decoded.tokens.iter().zip(&decoded.traces).enumerate() {
        let tok = example.token(vocab, id).to_string();
        if slot_name(&tok).is_some() {
            let fill = fill_slot_value(i, &tok, trace, &example.record.slot_table);
            match &fill.value {
                Some(v) => surface.extend(v.split(' ').map(str::to_string)),
                None => surface.push(tok.clone()),
            }
            fills.push(fill);
        } else {
            surface.push(tok.clone());
        }
        template.push(tok);
    }
    let unresolved = fills.iter().filter(|f| f.value.is_none()).count();
    Ok(Summary { id: example.id.clone(), template, surface, fills, unresolved, log_prob: decoded.log_prob })
}

pub fn predict_domains<T: Real>(params: &ModelParams<T>, example: &Example) -> ModelResult<DomainPrediction> {
    let mut g = Graph::new(params.tensors());
    let enc = encode_dialog(&mut g, &example.user_ids, &example.system_ids, example.base_size, example.extended_size())?;
    let cls = ClassifierNodes::from_params(&mut g);
    let d = classify_domains(&mut g, enc.user.final_state, enc.system.final_state, &cls)?;
    Ok(DomainPrediction(g.value(d).to_f64_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SlotEntry;

    fn trace(user: &[f64], system: &[f64]) -> DecoderStepTrace {
        DecoderStepTrace {
            x: vec![],
            s: vec![],
            user_energies: vec![0.0; user.len()],
            user_attention: user.to_vec(),
            system_energies: vec![0.0; system.len()],
            system_attention: system.to_vec(),
            context: vec![],
            p_gen: 0.5,
            distribution: vec![],
        }
    }

    fn entry(slot: &str, value: &str, encoder: Role, position: usize) -> SlotEntry {
        SlotEntry { slot: slot.into(), value: value.into(), encoder, position }
    }

    #[test]
    fn single_occurrence() {
        let table = SlotTable { entries: vec![entry("time", "18:00", Role::User, 1)] };
        let f = fill_slot_value(0, "[time]", &trace(&[0.5, 0.5], &[1.0]), &table);
        assert_eq!(f.value.as_deref(), Some("18:00"));
        assert_eq!(f.position, Some(1));
    }

    #[test]
    fn argmax_of_merged_attention() {
        let table = SlotTable {
            entries: vec![entry("time", "18:00", Role::User, 0), entry("time", "19:00", Role::System, 0)],
        };
        let f = fill_slot_value(0, "[time]", &trace(&[0.1, 0.9], &[0.7, 0.3]), &table);
        assert_eq!(f.value.as_deref(), Some("19:00"));
        assert!((f.weight - 0.35).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_ties_on_two_positions() {
        for (ea, eb) in [(Role::User, Role::User), (Role::User, Role::System), (Role::System, Role::User), (Role::System, Role::System)] {
            for (pa, pb) in [(0, 1), (1, 0)] {
                if ea == eb && pa == pb {
                    continue;
                }
                let table = SlotTable { entries: vec![entry("day", "a", ea, pa), entry("day", "b", eb, pb)] };
                let t = trace(&[0.5, 0.5], &[0.5, 0.5]);
                let expect = if (ea.encoder_id(), pa) < (eb.encoder_id(), pb) { "a" } else { "b" };
                for _ in 0..3 {
                    assert_eq!(fill_slot_value(0, "[day]", &t, &table).value.as_deref(), Some(expect));
                }
            }
        }
    }

    #[test]
    fn missing_slot_is_flagged() {
        let f = fill_slot_value(2, "[stars]", &trace(&[1.0], &[1.0]), &SlotTable::default());
        assert!(f.value.is_none());
        assert_eq!(f.slot, "stars");
    }
}
