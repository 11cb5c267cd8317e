//! Tokenization, ROUGE-N / ROUGE-L, source n-gram overlap and length
//! statistics.
//!
//! ROUGE here is unstemmed and stopword-free, computed on lowercase
//! alphanumeric tokens. ROUGE-L is the whole-sequence LCS variant.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::split_sentences;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TextMetricsError {
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn ngrams(&self, n: usize) -> impl Iterator<Item = &[String]> {
        self.0.windows(n)
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(
            iter.into_iter()
                .map(|s| s.into().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect(),
        )
    }
}

/// Lowercases and splits on maximal runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> TokenSequence {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(matched: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |m: usize, d: usize| if d == 0 { 0.0 } else { m as f64 / d as f64 };
        Self::from_pr(ratio(matched, candidate_total), ratio(matched, reference_total))
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

fn ngram_counts(seq: &TokenSequence, n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in seq.ngrams(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram matching.
///
/// # Panics
/// If `n == 0`.
pub fn rouge_n(candidate: &TokenSequence, reference: &TokenSequence, n: usize) -> Prf {
    assert!(n >= 1, "n-gram order must be positive");
    let cand = ngram_counts(candidate, n);
    let reference_counts = ngram_counts(reference, n);
    let matched: usize = cand
        .iter()
        .map(|(g, c)| (*c).min(reference_counts.get(g).copied().unwrap_or(0)))
        .sum();
    let total = |s: &TokenSequence| s.len().saturating_sub(n - 1);
    Prf::from_counts(matched, total(candidate), total(reference))
}

pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut curr = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

pub fn rouge_l(candidate: &TokenSequence, reference: &TokenSequence) -> Prf {
    let lcs = lcs_len(candidate.tokens(), reference.tokens());
    Prf::from_counts(lcs, candidate.len(), reference.len())
}

/// Fraction of distinct summary n-grams that appear somewhere in `source`.
pub fn ngram_overlap(summary: &TokenSequence, source: &TokenSequence, n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be positive");
    let types: HashSet<&[String]> = summary.ngrams(n).collect();
    if types.is_empty() {
        return 0.0;
    }
    let source_types: HashSet<&[String]> = source.ngrams(n).collect();
    let hit = types.iter().filter(|g| source_types.contains(*g)).count();
    hit as f64 / types.len() as f64
}

pub const HISTOGRAM_BUCKET_WORDS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub mean_words: f64,
    pub mean_sentences: f64,
    /// Lower bucket bound (multiple of 50 words) to text count.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn sentence_count(text: &str) -> usize {
    split_sentences(text)
        .iter()
        .filter(|s| !s.trim().is_empty())
        .count()
}

pub fn length_stats<S: AsRef<str>>(texts: &[S]) -> Result<LengthStats, TextMetricsError> {
    if texts.is_empty() {
        return Err(TextMetricsError::EmptyCorpus);
    }
    let mut words = 0usize;
    let mut sentences = 0usize;
    let mut histogram = BTreeMap::new();
    for text in texts {
        let text = text.as_ref();
        let w = tokenize(text).len();
        words += w;
        sentences += sentence_count(text);
        *histogram
            .entry(w / HISTOGRAM_BUCKET_WORDS * HISTOGRAM_BUCKET_WORDS)
            .or_insert(0) += 1;
    }
    let n = texts.len() as f64;
    Ok(LengthStats {
        mean_words: words as f64 / n,
        mean_sentences: sentences as f64 / n,
        histogram,
    })
}
