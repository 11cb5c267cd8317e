use std::collections::BTreeMap;

use proptest::prelude::*;
use structsum_core::prompt::{build_prompt, parse_prompt, prompt_for_record, LabelSource, PromptConfig, PromptError};
use structsum_core::record::CorpusRecord;
use structsum_core::{parse_label_sequence, LabelSequence, StructureLabel};

fn labels() -> impl Strategy<Value = LabelSequence> {
    prop::collection::vec(prop::sample::select(StructureLabel::ALL.to_vec()), 1..8).prop_map(LabelSequence::new)
}

fn document() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[a-zA-Z .,]{1,12}".prop_map(String::from),
        Just("==>".to_string()),
        Just(" ==> ".to_string()),
        Just(" | ".to_string()),
        Just("Issue".to_string()),
    ];
    prop::collection::vec(piece, 1..6).prop_map(|parts| parts.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_build(labels in labels(), doc in document()) {
        let cfg = PromptConfig::default();
        let prompted = build_prompt(&labels, &doc, &cfg).unwrap();
        let (parsed, rest) = parse_prompt(&prompted, &cfg).unwrap();
        prop_assert_eq!(parsed, labels.clone());
        prop_assert_eq!(&rest, &doc);
        let head: usize = labels.iter().map(|l| l.as_str().len()).sum::<usize>() + 3 * (labels.len() - 1);
        prop_assert_eq!(prompted.len(), head + " ==> ".len() + doc.len());
    }

    #[test]
    fn round_trip_with_custom_style(labels in labels(), doc in document()) {
        let mut overrides = BTreeMap::new();
        overrides.insert(StructureLabel::NonIrc, "Other".to_string());
        let cfg = PromptConfig {
            label_separator: ", ".into(),
            marker: "=>".into(),
            pad_marker: false,
            label_surface_overrides: overrides,
        };
        let prompted = build_prompt(&labels, &doc, &cfg).unwrap();
        let (parsed, rest) = parse_prompt(&prompted, &cfg).unwrap();
        prop_assert_eq!(parsed, labels);
        prop_assert_eq!(rest, doc);
    }
}

#[test]
fn table_five_prompt_verbatim() {
    let labels = parse_label_sequence("Issue | Conclusion | Conclusion | Reason", " | ").unwrap();
    let prompted = build_prompt(&labels, "DOC", &PromptConfig::default()).unwrap();
    assert_eq!(prompted, "Issue | Conclusion | Conclusion | Reason ==> DOC");
}

#[test]
fn build_rejects_empty_inputs() {
    let cfg = PromptConfig::default();
    let labels = parse_label_sequence("Issue", " | ").unwrap();
    assert_eq!(build_prompt(&LabelSequence::empty(), "doc", &cfg), Err(PromptError::EmptyLabels));
    assert_eq!(build_prompt(&labels, "", &cfg), Err(PromptError::EmptyDocument));
    assert_eq!(parse_prompt("no marker here", &cfg), Err(PromptError::NoMarker));
}

#[test]
fn record_prompts_need_the_chosen_labels() {
    let record = CorpusRecord::new("a", "doc", "ref");
    assert_eq!(
        prompt_for_record(&record, &LabelSource::Gold, &PromptConfig::default()),
        Err(PromptError::MissingLabels("gold"))
    );
    let custom = LabelSource::Custom(parse_label_sequence("Reason", " | ").unwrap());
    assert_eq!(prompt_for_record(&record, &custom, &PromptConfig::default()).unwrap(), "Reason ==> doc");
}
