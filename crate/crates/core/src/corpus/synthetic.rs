//! Template-driven dialog generator for desk-scale experiments.
//!
//! Each dialog instantiates one or two domain templates with random slot
//! values. The reference summary comes from the same templates, so a model
//! can learn it exactly from the source.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::delex::delexicalize_tokens;
use super::dialog::{Dialog, DomainInventory, Role, SlotSpan, Turn};
use super::slots::{slot_name, SlotInventory};
use super::tokenize::{is_slot_token, tokenize};

#[derive(Debug, Clone)]
pub struct SlotValues {
    pub slot: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TurnTemplate {
    pub role: Role,
    /// Alternative phrasings; slot tokens like `[food]` are filled with values.
    pub variants: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct DomainTemplate {
    pub name: String,
    pub slots: Vec<SlotValues>,
    /// Must alternate roles starting with the user and have even length.
    pub turns: Vec<TurnTemplate>,
    pub summary: String,
}

impl DomainTemplate {
    fn shares_slots_with(&self, other: &DomainTemplate) -> bool {
        self.slots.iter().any(|a| other.slots.iter().any(|b| a.slot == b.slot))
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub templates: Vec<DomainTemplate>,
    pub max_domains: usize,
}

impl SyntheticConfig {
    /// Restaurant, hotel, taxi and attraction templates with disjoint slot sets.
    pub fn standard() -> Self {
        SyntheticConfig { templates: standard_templates(), max_domains: 2 }
    }

    /// Only the named templates, in the given order.
    pub fn with_domains(names: &[&str]) -> Self {
        let all = standard_templates();
        let templates = names
            .iter()
            .map(|n| all.iter().find(|t| t.name == *n).unwrap_or_else(|| panic!("no template `{n}`")).clone())
            .collect();
        SyntheticConfig { templates, max_domains: 2 }
    }

    pub fn domains(&self) -> DomainInventory {
        DomainInventory(self.templates.iter().map(|t| t.name.clone()).collect())
    }

    pub fn slot_inventory(&self) -> SlotInventory {
        SlotInventory::new(self.templates.iter().flat_map(|t| t.slots.iter().map(|s| s.slot.clone())))
    }
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn slot(name: &str, values: &[&str]) -> SlotValues {
    SlotValues { slot: name.into(), values: strings(values) }
}

fn turn(role: Role, variants: &[&str]) -> TurnTemplate {
    TurnTemplate { role, variants: strings(variants) }
}

fn standard_templates() -> Vec<DomainTemplate> {
    use Role::{System, User};
    vec![
        DomainTemplate {
            name: "restaurant".into(),
            slots: vec![
                slot("food", &["chinese", "indian", "italian", "british", "thai", "french", "modern european"]),
                slot("area", &["north", "south", "east", "west", "centre"]),
                slot(
                    "place_name",
                    &["ask restaurant", "the golden curry", "pizza hut city centre", "curry garden", "the nirala", "charlie chan", "la margherita"],
                ),
                slot("time", &["18:00", "19:30", "12:15", "17:45", "20:00", "11:30", "13:00"]),
                slot("people", &["1", "2", "3", "4", "5", "6"]),
            ],
            turns: vec![
                turn(User, &[
                    "i am looking for a [food] restaurant in the [area] .",
                    "hello , looking for a [food] restaurant in the [area] .",
                ]),
                turn(System, &[
                    "looking for a [food] restaurant in the [area] . [place_name] is nice .",
                    "[place_name] is great if you are looking for a [food] restaurant in the [area] .",
                ]),
                turn(User, &[
                    "book a table for [people] people at [time] at [place_name] .",
                    "please , a table for [people] people at [time] at [place_name] .",
                ]),
                turn(System, &[
                    "done , a table for [people] people at [time] at [place_name] .",
                    "i booked a table for [people] people at [time] at [place_name] .",
                ]),
            ],
            summary: "looking for a [food] restaurant in the [area] . a table for [people] people at [time] at [place_name] .".into(),
        },
        DomainTemplate {
            name: "hotel".into(),
            slots: vec![
                slot("pricerange", &["cheap", "moderate", "expensive"]),
                slot("stars", &["2", "3", "4", "5"]),
                slot("stay", &["1", "2", "3", "4", "5"]),
                slot("day", &["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]),
            ],
            turns: vec![
                turn(User, &[
                    "i need a [pricerange] hotel with [stars] stars .",
                    "please , find me a [pricerange] hotel with [stars] stars .",
                ]),
                turn(System, &[
                    "there is a [pricerange] hotel with [stars] stars . how many nights ?",
                    "i found a [pricerange] hotel with [stars] stars . for how long ?",
                ]),
                turn(User, &["[stay] nights starting [day] .", "i will stay [stay] nights starting [day] ."]),
                turn(System, &[
                    "booked for [stay] nights starting [day] .",
                    "confirmed , [stay] nights starting [day] .",
                ]),
            ],
            summary: "a [pricerange] hotel with [stars] stars . [stay] nights starting [day] .".into(),
        },
        DomainTemplate {
            name: "taxi".into(),
            slots: vec![
                slot("departure", &["the cambridge station", "kings college", "the gonville hotel", "addenbrookes hospital"]),
                slot("destination", &["the museum of archaeology", "parkside police station", "the grafton centre", "jesus green"]),
            ],
            turns: vec![
                turn(User, &[
                    "i need a taxi from [departure] to [destination] .",
                    "can you get me a taxi from [departure] to [destination] .",
                ]),
                turn(System, &[
                    "booked : a taxi from [departure] to [destination] .",
                    "i have booked a taxi from [departure] to [destination] .",
                ]),
            ],
            summary: "a taxi from [departure] to [destination] .".into(),
        },
        DomainTemplate {
            name: "attraction".into(),
            slots: vec![slot("type", &["museum", "park", "theatre", "college", "nightclub", "swimming pool"])],
            turns: vec![
                turn(User, &["i would like to visit a [type] .", "i want to visit a [type] . is there one in town ?"]),
                turn(System, &["you could visit a [type] . it is near the centre .", "sure , visit a [type] . it is in the north ."]),
            ],
            summary: "visit a [type] .".into(),
        },
    ]
}

/// Fills slot tokens in a template with values, recording spans.
fn render(
    template: &str,
    values: &[(String, String, String)],
) -> (Vec<String>, Vec<SlotSpan>) {
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    for tok in tokenize(template) {
        let filled = is_slot_token(&tok)
            .then(|| slot_name(&tok))
            .flatten()
            .and_then(|name| values.iter().find(|(s, _, _)| s == name));
        match filled {
            Some((slot, value, domain)) => {
                let start = tokens.len();
                tokens.extend(tokenize(value));
                spans.push(SlotSpan {
                    slot: slot.clone(),
                    value: tokens[start..].join(" "),
                    start,
                    end: tokens.len(),
                    domain: Some(domain.clone()),
                });
            }
            None => tokens.push(tok),
        }
    }
    (tokens, spans)
}

const CLOSING_USER: [&str; 2] = ["thank you , that is all i need .", "great , thanks for your help ."];
const CLOSING_SYSTEM: [&str; 2] = ["you are welcome . goodbye .", "have a nice day ."];

/// Deterministic in `seed`. Domains whose slot sets overlap are never combined in one dialog.
pub fn generate_synthetic_corpus(seed: u64, n_dialogs: usize, config: &SyntheticConfig) -> Vec<Dialog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates = &config.templates;
    assert!(!templates.is_empty(), "at least one domain template");
    (0..n_dialogs)
        .map(|i| {
            let want = rng.gen_range(1..=config.max_domains.clamp(1, templates.len()));
            let mut order: Vec<usize> = (0..templates.len()).collect();
            order.shuffle(&mut rng);
            let mut chosen: Vec<usize> = Vec::new();
            for idx in order {
                if chosen.len() == want {
                    break;
                }
                if chosen.iter().all(|&c| !templates[c].shares_slots_with(&templates[idx])) {
                    chosen.push(idx);
                }
            }
            let mut values = Vec::new();
            for &c in &chosen {
                for sv in &templates[c].slots {
                    let v = sv.values.choose(&mut rng).expect("slot has values");
                    values.push((sv.slot.clone(), v.clone(), templates[c].name.clone()));
                }
            }
            let mut turns = Vec::new();
            for &c in &chosen {
                for tt in &templates[c].turns {
                    let variant = tt.variants.choose(&mut rng).expect("turn has variants");
                    let (tokens, slot_spans) = render(variant, &values);
                    turns.push(Turn { role: tt.role, tokens, slot_spans });
                }
            }
            for (role, pool) in [(Role::User, &CLOSING_USER), (Role::System, &CLOSING_SYSTEM)] {
                let text = pool.choose(&mut rng).expect("closing");
                turns.push(Turn { role, tokens: tokenize(text), slot_spans: Vec::new() });
            }
            let summary_text: Vec<&str> = chosen.iter().map(|&c| templates[c].summary.as_str()).collect();
            let (reference_summary, summary_spans) = render(&summary_text.join(" "), &values);
            let (reference_summary_delex, _) =
                delexicalize_tokens(&reference_summary, &summary_spans, Role::User).expect("rendered spans are valid");
            let mut domains: Vec<String> = chosen.iter().map(|&c| templates[c].name.clone()).collect();
            domains.sort_by_key(|d| templates.iter().position(|t| &t.name == d));
            Dialog {
                id: format!("syn-{seed}-{i:05}"),
                turns,
                domains,
                reference_summary,
                reference_summary_delex,
                summary_spans,
            }
        })
        .collect()
}
