use proptest::prelude::*;
use structsum_core::bridge::{
    ClassifyResponse, GenerateRequest, GenerateResponse, GeneratedCandidate, Handshake, MockScorer, MockScorerConfig,
    Classifier, Scorer, SentenceBanks,
};
use structsum_core::params::GenerationParams;
use structsum_core::{LabelProbs, StructureLabel};

fn request(document: &str, prefix: &str, target: Option<StructureLabel>, n: u32) -> GenerateRequest {
    GenerateRequest {
        document: document.into(),
        summary_prefix: prefix.into(),
        target_label: target,
        params: GenerationParams {
            num_candidates: n,
            ..GenerationParams::default()
        },
    }
}

fn probs() -> impl Strategy<Value = LabelProbs> {
    prop::array::uniform4(0.0f64..1.0).prop_filter_map("needs mass", |raw| {
        let total: f64 = raw.iter().sum();
        (total > 1e-6).then(|| LabelProbs::new(raw.map(|x| x / total)).ok()).flatten()
    })
}

fn target() -> impl Strategy<Value = Option<StructureLabel>> {
    prop::option::of(prop::sample::select(StructureLabel::ALL.to_vec()))
}

proptest! {
    #[test]
    fn candidates_round_trip_through_json(text in ".{0,40}", ll in -50.0f64..0.0, p in prop::option::of(probs())) {
        let candidate = GeneratedCandidate { text, log_likelihood: ll, label_probs: p };
        let json = serde_json::to_string(&GenerateResponse { candidates: vec![candidate.clone()] }).unwrap();
        let back: GenerateResponse = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.candidates, vec![candidate]);
    }

    #[test]
    fn mock_is_a_pure_function(seed in any::<u64>(), doc in "[a-z ]{0,30}", t in target(), n in 1u32..8, noise in 0.0f64..1.0) {
        let cfg = MockScorerConfig { seed, noise, ..MockScorerConfig::default() };
        let (a, b) = (MockScorer::new(cfg.clone()), MockScorer::new(cfg));
        let req = request(&doc, "At issue was custody of the two children. ", t, n);
        let (ca, cb) = (a.generate(&req).unwrap(), b.generate(&req).unwrap());
        prop_assert_eq!(serde_json::to_string(&ca).unwrap(), serde_json::to_string(&cb).unwrap());
        prop_assert_eq!(ca.len(), n as usize);
        for c in &ca {
            prop_assert!(c.log_likelihood <= 0.0);
            let p = c.label_probs.unwrap();
            prop_assert!(p.as_array().iter().all(|x| *x > 0.0 && *x < 1.0));
        }
        if let Some(label) = t {
            let on_target = ca.iter().filter(|c| c.label_probs.unwrap().argmax() == label).count();
            prop_assert!(on_target >= (n as usize).div_ceil(2));
        }
    }
}

#[test]
fn mock_signals_end_of_sequence() {
    let scorer = MockScorer::new(MockScorerConfig {
        eos_after: 2,
        ..MockScorerConfig::default()
    });
    assert_eq!(scorer.generate(&request("d", "", None, 3)).unwrap().len(), 3);
    assert_eq!(scorer.generate(&request("d", "One. Two. ", None, 3)).unwrap().len(), 0);
}

#[test]
fn mock_depends_on_seed() {
    let req = request("A document.", "", None, 6);
    let draws: Vec<String> = (0..5)
        .map(|seed| {
            let scorer = MockScorer::new(MockScorerConfig {
                seed,
                ..MockScorerConfig::default()
            });
            serde_json::to_string(&scorer.generate(&req).unwrap()).unwrap()
        })
        .collect();
    assert!(draws.iter().skip(1).any(|d| d != &draws[0]));
}

#[test]
fn mock_classifies_bank_sentences() {
    let scorer = MockScorer::new(MockScorerConfig::default());
    let banks = SentenceBanks::bundled();
    let mut sentences: Vec<String> = StructureLabel::ALL.iter().map(|l| banks.bank(*l)[0].clone()).collect();
    sentences.push("Unrelated text.".into());
    let probs = scorer.classify(&sentences).unwrap();
    for (i, label) in StructureLabel::ALL.into_iter().enumerate() {
        assert_eq!(probs[i].argmax(), label);
        assert_eq!(probs[i].get(label), 0.97);
    }
    assert_eq!(probs[4], LabelProbs::uniform());
}

#[test]
fn wire_shapes() {
    let hs = MockScorer::new(MockScorerConfig::default()).handshake().unwrap();
    assert_eq!(hs.name, "mock");
    assert!(hs.supports_inline_label_probs);
    let json = serde_json::to_value(&hs).unwrap();
    let back: Handshake = serde_json::from_value(json.clone()).unwrap();
    assert_eq!(back, hs);
    assert!(json.get("max_concurrency").is_some());

    let req = request("doc", "", Some(StructureLabel::NonIrc), 2);
    let value = serde_json::to_value(&req).unwrap();
    assert_eq!(value["target_label"], "Non_IRC");
    assert_eq!(value["params"]["num_candidates"], 2);

    let classify: ClassifyResponse = serde_json::from_str(r#"{"probs": [[0.25, 0.25, 0.25, 0.25]]}"#).unwrap();
    assert_eq!(classify.probs[0], LabelProbs::uniform());
    assert!(serde_json::from_str::<ClassifyResponse>(r#"{"probs": [[0.5, 0.5, 0.5, 0.5]]}"#).is_err());
}
