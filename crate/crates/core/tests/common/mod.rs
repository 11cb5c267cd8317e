#![allow(dead_code)]

use std::collections::BTreeMap;

use structsum_core::bridge::{MockScorerConfig, Scorer, SentenceBanks};
use structsum_core::corpus::parse_corpus;
use structsum_core::decoder::{decode_sentbs, decode_unconstrained, DecodeConfig};
use structsum_core::structure::structure_similarity;
use structsum_core::synthetic::BUNDLED_CORPUS;
use structsum_core::{LabelSequence, StructureLabel};

/// Banks whose sentences are all exactly four words long.
pub fn four_word_banks() -> SentenceBanks {
    let mut banks = BTreeMap::new();
    banks.insert(
        StructureLabel::Issue,
        vec!["Was the search lawful?".to_string(), "Was notice properly given?".to_string()],
    );
    banks.insert(
        StructureLabel::Conclusion,
        vec!["The appeal was allowed.".to_string(), "The claim was dismissed.".to_string()],
    );
    banks.insert(
        StructureLabel::Reason,
        vec!["The evidence was weak.".to_string(), "No warrant was obtained.".to_string()],
    );
    banks.insert(
        StructureLabel::NonIrc,
        vec!["The hearing lasted days.".to_string(), "Both parties were represented.".to_string()],
    );
    SentenceBanks::new(banks).unwrap()
}

/// (document, gold structure) pairs from the bundled synthetic corpus.
pub fn bundled_cases() -> Vec<(String, LabelSequence)> {
    parse_corpus(BUNDLED_CORPUS)
        .unwrap()
        .into_iter()
        .map(|r| (r.document, r.gold_labels.unwrap()))
        .collect()
}

pub fn with_lambda(lambda: f64) -> DecodeConfig {
    DecodeConfig {
        lambda,
        ..DecodeConfig::default()
    }
}

/// λ = 1 structure-controlled decoding equals unconstrained decoding when
/// the generator stops after |structure| sentences.
pub fn check_lambda_one_matches_unconstrained(scorer_for: &dyn Fn(MockScorerConfig) -> Box<dyn Scorer>) {
    for (document, structure) in bundled_cases() {
        let scorer = scorer_for(MockScorerConfig {
            seed: 7,
            eos_after: structure.len() as u32,
            ..MockScorerConfig::default()
        });
        let controlled = decode_sentbs(&document, &structure, &scorer, &with_lambda(1.0)).unwrap();
        let free = decode_unconstrained(&document, &scorer, &with_lambda(1.0)).unwrap();
        assert_eq!(controlled.final_summary.as_bytes(), free.final_summary.as_bytes());
        assert_eq!(controlled.steps.len(), free.steps.len());
        for (c, f) in controlled.steps.iter().zip(&free.steps) {
            assert_eq!(c.chosen_index, f.chosen_index);
            assert_eq!(c.candidates, f.candidates);
        }
    }
}

/// λ = 0 picks the first candidate with the highest target probability.
pub fn check_lambda_zero_maximizes_label_prob(scorer: &dyn Scorer) {
    for (document, structure) in bundled_cases() {
        let trace = decode_sentbs(&document, &structure, scorer, &with_lambda(0.0)).unwrap();
        assert_eq!(trace.steps.len(), structure.len());
        for step in &trace.steps {
            let target = step.target_label.unwrap();
            let probs: Vec<f64> = step.candidates.iter().map(|c| c.label_probs.get(target)).collect();
            let best = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let first = probs.iter().position(|p| *p == best).unwrap();
            assert_eq!(step.chosen_index, first);
        }
    }
}

/// Every requested label is realized when the mock's target bank dominates.
pub fn check_mock_adherence(scorer: &dyn Scorer) {
    for (document, structure) in bundled_cases() {
        let trace = decode_sentbs(&document, &structure, scorer, &with_lambda(0.5)).unwrap();
        assert_eq!(trace.check_invariants(), Ok(()));
        assert_eq!(trace.realized_labels, structure);
        assert_eq!(structure_similarity(&trace.realized_labels, &structure), 1.0);
    }
}
