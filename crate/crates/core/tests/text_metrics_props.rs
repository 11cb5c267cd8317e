use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use structsum_core::text_metrics::{
    length_stats, lcs_len, ngram_overlap, rouge_l, rouge_n, sentence_count, tokenize, Prf, TokenSequence,
};

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..14)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn seq(words: &[String]) -> TokenSequence {
    words.iter().cloned().collect()
}

/// Matches each candidate n-gram against the first unused equal reference
/// n-gram by scanning both lists.
fn oracle_rouge(cand: &[String], reference: &[String], n: usize) -> Prf {
    let grams = |t: &[String]| -> Vec<Vec<String>> {
        if t.len() < n {
            return Vec::new();
        }
        (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
    };
    let (cg, rg) = (grams(cand), grams(reference));
    let mut used = vec![false; rg.len()];
    let mut matched = 0;
    for g in &cg {
        for (j, r) in rg.iter().enumerate() {
            if !used[j] && r == g {
                used[j] = true;
                matched += 1;
                break;
            }
        }
    }
    let p = if cg.is_empty() { 0.0 } else { matched as f64 / cg.len() as f64 };
    let r = if rg.is_empty() { 0.0 } else { matched as f64 / rg.len() as f64 };
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    Prf { precision: p, recall: r, f1 }
}

fn oracle_lcs(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() || b.is_empty() {
            return 0;
        }
        let key = (a.len(), b.len());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = if a[0] == b[0] {
            1 + go(&a[1..], &b[1..], memo)
        } else {
            go(&a[1..], b, memo).max(go(a, &b[1..], memo))
        };
        memo.insert(key, v);
        v
    }
    go(a, b, &mut HashMap::new())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rouge_n_matches_counting_oracle(a in tokens(), b in tokens(), n in 1usize..=3) {
        prop_assert_eq!(rouge_n(&seq(&a), &seq(&b), n), oracle_rouge(&a, &b, n));
    }

    #[test]
    fn lcs_matches_recursive_oracle(a in tokens(), b in tokens()) {
        prop_assert_eq!(lcs_len(&a, &b), oracle_lcs(&a, &b));
    }

    #[test]
    fn overlap_matches_set_oracle(a in tokens(), b in tokens(), n in 1usize..=3) {
        let grams = |t: &[String]| -> HashSet<Vec<String>> {
            if t.len() < n { return HashSet::new(); }
            (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
        };
        let (sa, sb) = (grams(&a), grams(&b));
        let expected = if sa.is_empty() { 0.0 } else { sa.intersection(&sb).count() as f64 / sa.len() as f64 };
        prop_assert_eq!(ngram_overlap(&seq(&a), &seq(&b), n), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn swapping_arguments_transposes_precision_and_recall(a in tokens(), b in tokens(), n in 1usize..=3) {
        let (ab, ba) = (rouge_n(&seq(&a), &seq(&b), n), rouge_n(&seq(&b), &seq(&a), n));
        prop_assert_eq!(ab.precision, ba.recall);
        prop_assert_eq!(ab.recall, ba.precision);
        prop_assert_eq!(ab.f1, ba.f1);
        let (lab, lba) = (rouge_l(&seq(&a), &seq(&b)), rouge_l(&seq(&b), &seq(&a)));
        prop_assert_eq!(lab.precision, lba.recall);
        prop_assert_eq!(lab.f1, lba.f1);
    }

    #[test]
    fn prf_invariants(a in tokens(), b in tokens(), n in 1usize..=3) {
        for prf in [rouge_n(&seq(&a), &seq(&b), n), rouge_l(&seq(&a), &seq(&b))] {
            prop_assert!((0.0..=1.0).contains(&prf.precision));
            prop_assert!((0.0..=1.0).contains(&prf.recall));
            prop_assert!(prf.f1 <= prf.precision.max(prf.recall) + 1e-15);
            prop_assert!(prf.f1 >= prf.precision.min(prf.recall) - 1e-15 || prf.f1 == 0.0);
        }
    }

    #[test]
    fn self_comparison_is_perfect(a in tokens()) {
        let s = seq(&a);
        if !a.is_empty() {
            prop_assert_eq!(rouge_n(&s, &s, 1).f1, 1.0);
            prop_assert_eq!(rouge_l(&s, &s).f1, 1.0);
        }
    }
}

#[test]
fn hand_derived_triple() {
    let (cand, reference) = (tokenize("the cat sat"), tokenize("the cat ate"));
    assert!((rouge_n(&cand, &reference, 1).f1 - 2.0 / 3.0).abs() < 1e-12);
    assert!((rouge_n(&cand, &reference, 2).f1 - 0.5).abs() < 1e-12);
    assert!((rouge_l(&cand, &reference).f1 - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn clipping_counts_multiplicity() {
    let r = rouge_n(&tokenize("the the the"), &tokenize("the cat"), 1);
    assert!((r.precision - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(r.recall, 0.5);
}

#[test]
fn tokenizer_lowercases_and_splits() {
    assert_eq!(tokenize("The Court's ruling, 2015!").tokens(), ["the", "court", "s", "ruling", "2015"]);
    assert!(tokenize(" ... ").is_empty());
}

#[test]
fn length_stats_are_means() {
    let texts = ["One two. Three.", "Four five six seven."];
    let stats = length_stats(&texts).unwrap();
    assert_eq!(stats.mean_words, 3.5);
    assert_eq!(stats.mean_sentences, 1.5);
    assert_eq!(stats.histogram.get(&0), Some(&2));
    assert_eq!(sentence_count("Yes. No? Maybe!"), 3);
    assert!(length_stats::<&str>(&[]).is_err());
}
