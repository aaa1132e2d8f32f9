mod common;

use common::*;
use proptest::prelude::*;
use spnet::corpus::{delexicalize_tokens, relexicalize_text, Role, SlotSpan, SOS};
use spnet::eval::{cic, SlotValueSet};
use spnet::model::{NetworkStepper, StepModel};
use spnet::numcore::{ops::softmax, Tensor};

const WORDS: &[&str] = &["the", "cheap", "north", "hotel", "at", "7", "pm", "for", "two", "a"];
const SLOTS: &[&str] = &["name", "area", "time", "people"];

/// Tokens plus non-overlapping spans over them.
fn tokens_with_spans() -> impl Strategy<Value = (Vec<String>, Vec<SlotSpan>)> {
    prop::collection::vec((0..WORDS.len(), prop::option::of((0..SLOTS.len(), 1usize..4))), 1..12).prop_map(|parts| {
        let mut tokens = Vec::new();
        let mut spans = Vec::new();
        for (w, span) in parts {
            match span {
                Some((slot, len)) => {
                    let start = tokens.len();
                    tokens.extend((0..len).map(|k| WORDS[(w + k) % WORDS.len()].to_string()));
                    let value = tokens[start..].join(" ");
                    spans.push(SlotSpan { slot: SLOTS[slot].into(), value, start, end: tokens.len(), domain: None });
                }
                None => tokens.push(WORDS[w].to_string()),
            }
        }
        (tokens, spans)
    })
}

fn words(n: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(WORDS).prop_map(String::from), 0..n)
}

proptest! {
    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-50.0f64..50.0, 1..40)) {
        let p = softmax(&Tensor::vector(z)).unwrap();
        prop_assert!(p.data().iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((p.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delex_then_relex_restores_the_stream((tokens, spans) in tokens_with_spans()) {
        let (delex, table) = delexicalize_tokens(&tokens, &spans, Role::User).unwrap();
        prop_assert_eq!(delex.len(), tokens.len() - spans.iter().map(|s| s.end - s.start - 1).sum::<usize>());
        let (relex, report) = relexicalize_text(&delex, &table);
        prop_assert!(report.is_clean());
        prop_assert_eq!(relex, tokens);
    }

    #[test]
    fn cic_never_drops_when_the_candidate_grows(
        (tokens, spans) in tokens_with_spans(),
        candidate in words(15),
        extra in words(8),
    ) {
        let reference = SlotValueSet::from_spans(&spans);
        let before = cic(&reference, &candidate).mean;
        let grown: Vec<String> = candidate.iter().chain(&extra).cloned().collect();
        let after = cic(&reference, &grown).mean;
        prop_assert_eq!(before.is_some(), after.is_some());
        if let (Some(b), Some(a)) = (before, after) {
            prop_assert!(a >= b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
        // the source tokens contain every reference value
        if let Some(full) = cic(&reference, &tokens).mean {
            prop_assert_eq!(full, 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decoder_step_is_a_distribution(seed in 0u64..10_000, oov in 0usize..4) {
        let cfg = tiny_config();
        let params = random_params::<f64>(&cfg, seed, 1.0);
        let ex = random_example(seed, cfg.vocab_size, oov, cfg.num_domains);
        let mut st = NetworkStepper::new(&params, &ex).unwrap();
        let mut state = st.start().unwrap();
        let mut input = SOS;
        for &t in &ex.target_ids {
            let (trace, next) = st.step(&state, input).unwrap();
            prop_assert_eq!(trace.distribution.len(), ex.extended_size());
            prop_assert!(trace.distribution.iter().all(|&p| p >= 0.0));
            prop_assert!((trace.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            state = next;
            input = t;
        }
    }
}
