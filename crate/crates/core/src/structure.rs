//! Label-sequence analysis: pattern normalization, edit distance,
//! structure similarity and corpus pattern distributions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::labels::{LabelSequence, StructureLabel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Order in which [`normalize_pattern_with`] applies its two passes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeOrder {
    /// Drop `Non_IRC`, then merge neighbours.
    #[default]
    RemoveThenCollapse,
    /// Merge neighbours, then drop `Non_IRC`. Only for sensitivity analysis.
    CollapseThenRemove,
}

fn collapse(labels: impl IntoIterator<Item = StructureLabel>) -> LabelSequence {
    let mut out: Vec<StructureLabel> = Vec::new();
    for label in labels {
        if out.last() != Some(&label) {
            out.push(label);
        }
    }
    LabelSequence::new(out)
}

fn remove_non_irc(labels: impl IntoIterator<Item = StructureLabel>) -> impl Iterator<Item = StructureLabel> {
    labels.into_iter().filter(|l| *l != StructureLabel::NonIrc)
}

pub fn normalize_pattern(seq: &LabelSequence) -> LabelSequence {
    normalize_pattern_with(seq, NormalizeOrder::RemoveThenCollapse)
}

pub fn normalize_pattern_with(seq: &LabelSequence, order: NormalizeOrder) -> LabelSequence {
    match order {
        NormalizeOrder::RemoveThenCollapse => collapse(remove_non_irc(seq.iter().copied())),
        NormalizeOrder::CollapseThenRemove => {
            LabelSequence::from_iter(remove_non_irc(dedupe_segments(seq).into_inner()))
        }
    }
}

/// Collapses runs of equal adjacent labels, keeping `Non_IRC`.
pub fn dedupe_segments(seq: &LabelSequence) -> LabelSequence {
    collapse(seq.iter().copied())
}

/// Unit-cost Levenshtein distance over label sequences.
pub fn levenshtein(a: &LabelSequence, b: &LabelSequence) -> usize {
    let (a, b) = (a.labels(), b.labels());
    // Keep the shorter sequence as the row.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0usize; short.len() + 1];
    for (i, x) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let replace = prev[j] + usize::from(x != y);
            curr[j + 1] = replace.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// `1 - lev(sys, oracle) / max(|sys|, |oracle|)`, with two empty sequences
/// scoring 1.
pub fn structure_similarity(sys: &LabelSequence, oracle: &LabelSequence) -> f64 {
    let longest = sys.len().max(oracle.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(sys, oracle) as f64 / longest as f64
}

/// Similarity computed after normalizing both sides.
pub fn normalized_structure_similarity(sys: &LabelSequence, oracle: &LabelSequence) -> f64 {
    structure_similarity(&normalize_pattern(sys), &normalize_pattern(oracle))
}

/// Mean [`structure_similarity`] over `(system, oracle)` pairs.
pub fn corpus_similarity(pairs: &[(LabelSequence, LabelSequence)]) -> Result<f64, StructureError> {
    if pairs.is_empty() {
        return Err(StructureError::EmptyCorpus);
    }
    let total: f64 = pairs
        .iter()
        .map(|(sys, oracle)| structure_similarity(sys, oracle))
        .sum();
    Ok(total / pairs.len() as f64)
}

/// Pattern keys join labels with a bare `|`; the empty pattern is `""`.
pub fn pattern_key(seq: &LabelSequence) -> String {
    seq.join("|")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternEntry {
    pub pattern: String,
    pub count: usize,
    pub share: f64,
}

/// Counts of normalized patterns, sorted by descending count and then by key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDistribution {
    pub total: usize,
    pub patterns: Vec<PatternEntry>,
}

impl PatternDistribution {
    pub fn count(&self, pattern: &str) -> usize {
        self.patterns
            .iter()
            .find(|e| e.pattern == pattern)
            .map_or(0, |e| e.count)
    }

    pub fn share(&self, pattern: &str) -> f64 {
        self.count(pattern) as f64 / self.total as f64
    }

    /// Plain-text table of the `k` most frequent patterns.
    pub fn render_top(&self, k: usize) -> String {
        let mut out = format!("{:>6}  {:>7}  pattern\n", "count", "share");
        for entry in self.patterns.iter().take(k) {
            let shown = if entry.pattern.is_empty() { "(empty)" } else { &entry.pattern };
            out.push_str(&format!(
                "{:>6}  {:>6.2}%  {}\n",
                entry.count,
                entry.share * 100.0,
                shown.replace('|', " - ")
            ));
        }
        out
    }
}

pub fn pattern_distribution(corpus: &[LabelSequence]) -> Result<PatternDistribution, StructureError> {
    pattern_distribution_with(corpus, NormalizeOrder::default())
}

pub fn pattern_distribution_with(
    corpus: &[LabelSequence],
    order: NormalizeOrder,
) -> Result<PatternDistribution, StructureError> {
    if corpus.is_empty() {
        return Err(StructureError::EmptyCorpus);
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for seq in corpus {
        *counts
            .entry(pattern_key(&normalize_pattern_with(seq, order)))
            .or_default() += 1;
    }
    let total = corpus.len();
    let mut patterns: Vec<PatternEntry> = counts
        .into_iter()
        .map(|(pattern, count)| PatternEntry {
            pattern,
            count,
            share: count as f64 / total as f64,
        })
        .collect();
    patterns.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.pattern.cmp(&b.pattern)));
    Ok(PatternDistribution { total, patterns })
}

#[cfg(test)]
mod tests {
    use super::StructureLabel::*;
    use super::*;

    fn seq(labels: &[StructureLabel]) -> LabelSequence {
        LabelSequence::new(labels.to_vec())
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(
            normalize_pattern(&seq(&[Issue, Conclusion, Reason, Reason])),
            seq(&[Issue, Conclusion, Reason])
        );
        assert_eq!(normalize_pattern(&seq(&[NonIrc, NonIrc])), seq(&[]));
        assert_eq!(
            normalize_pattern(&seq(&[Issue, NonIrc, Issue, Conclusion])),
            seq(&[Issue, Conclusion])
        );
        // The other order keeps both Issues apart.
        assert_eq!(
            normalize_pattern_with(
                &seq(&[Issue, NonIrc, Issue, Conclusion]),
                NormalizeOrder::CollapseThenRemove
            ),
            seq(&[Issue, Issue, Conclusion])
        );
    }

    #[test]
    fn dedupe_examples() {
        assert_eq!(
            dedupe_segments(&seq(&[Issue, Issue, Conclusion, Reason, Reason])),
            seq(&[Issue, Conclusion, Reason])
        );
        assert_eq!(
            dedupe_segments(&seq(&[NonIrc, NonIrc, Issue])),
            seq(&[NonIrc, Issue])
        );
        assert_eq!(dedupe_segments(&seq(&[])), seq(&[]));
    }

    #[test]
    fn levenshtein_examples() {
        let icr = seq(&[Issue, Conclusion, Reason]);
        assert_eq!(levenshtein(&icr, &icr), 0);
        assert_eq!(levenshtein(&icr, &seq(&[Issue, Reason])), 1);
        assert_eq!(levenshtein(&seq(&[]), &icr), 3);
        assert_eq!(levenshtein(&icr, &seq(&[])), 3);
        assert_eq!(levenshtein(&seq(&[Issue, Issue]), &seq(&[Reason, Reason])), 2);
    }

    #[test]
    fn similarity_examples() {
        let icr = seq(&[Issue, Conclusion, Reason]);
        assert_eq!(structure_similarity(&icr, &icr), 1.0);
        assert!((structure_similarity(&icr, &seq(&[Issue, Reason])) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(structure_similarity(&seq(&[Issue, Issue]), &seq(&[Reason, Reason])), 0.0);
        assert_eq!(structure_similarity(&seq(&[]), &seq(&[])), 1.0);
        assert_eq!(structure_similarity(&seq(&[]), &icr), 0.0);
        assert_eq!(
            normalized_structure_similarity(&seq(&[Issue, Issue, Reason]), &seq(&[Issue, Reason])),
            1.0
        );
    }

    #[test]
    fn corpus_similarity_examples() {
        let x = seq(&[Issue]);
        let y = seq(&[Conclusion, Reason]);
        assert_eq!(corpus_similarity(&[(x.clone(), x.clone()), (y.clone(), y)]).unwrap(), 1.0);
        let v = corpus_similarity(&[
            (seq(&[Issue, Conclusion, Reason]), seq(&[Issue, Reason])),
            (x.clone(), x),
        ])
        .unwrap();
        assert!((v - (2.0 / 3.0 + 1.0) / 2.0).abs() < 1e-12);
        assert_eq!(corpus_similarity(&[]), Err(StructureError::EmptyCorpus));
    }

    #[test]
    fn distribution_examples() {
        let corpus = vec![seq(&[Issue, Conclusion, Reason, Reason]); 100];
        let dist = pattern_distribution(&corpus).unwrap();
        assert_eq!(dist.total, 100);
        assert_eq!(dist.patterns.len(), 1);
        assert_eq!(dist.count("Issue|Conclusion|Reason"), 100);

        let dist = pattern_distribution(&[seq(&[Issue]), seq(&[NonIrc])]).unwrap();
        assert_eq!(dist.total, 2);
        assert_eq!(dist.count("Issue"), 1);
        assert_eq!(dist.count(""), 1);
        // Tie on count: lexicographic key order puts "" first.
        assert_eq!(dist.patterns[0].pattern, "");

        assert_eq!(pattern_distribution(&[]), Err(StructureError::EmptyCorpus));
    }

    #[test]
    fn distribution_json_shape() {
        let dist = pattern_distribution(&[seq(&[Issue, Reason])]).unwrap();
        let json = serde_json::to_string(&dist).unwrap();
        assert_eq!(
            json,
            r#"{"total":1,"patterns":[{"pattern":"Issue|Reason","count":1,"share":1.0}]}"#
        );
        assert!(dist.render_top(5).contains("Issue - Reason"));
    }
}
