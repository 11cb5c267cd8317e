//! Deterministic synthetic corpora built from the sentence banks, for
//! exercising the full pipeline without real data.

use crate::bridge::SentenceBanks;
use crate::labels::{LabelSequence, StructureLabel};
use crate::record::CorpusRecord;
use crate::rng::{stream_seed, SplitMix64};

/// 20 records generated by `corpus(&SentenceBanks::bundled(), 20, 7)`.
pub const BUNDLED_CORPUS: &str = include_str!("../fixtures/synthetic_corpus.jsonl");

use StructureLabel::{Conclusion as C, Issue as I, NonIrc as N, Reason as R};

/// Gold structures to draw from; Issue-Conclusion-Reason shapes dominate.
const PATTERNS: [&[StructureLabel]; 10] = [
    &[I, C, R],
    &[I, C, R, R],
    &[N, I, C, R],
    &[I, C, R, R, R],
    &[N, N, I, C, R, R],
    &[I, R, C],
    &[C, I, R],
    &[I, C],
    &[I, I, C, R],
    &[N, I, R, C, R],
];

pub fn corpus(banks: &SentenceBanks, n: usize, seed: u64) -> Vec<CorpusRecord> {
    (0..n)
        .map(|i| {
            let mut rng = SplitMix64::new(stream_seed(seed, &[i as u64]));
            let pattern = PATTERNS[rng.index(PATTERNS.len())];
            let mut pick = |label: StructureLabel| {
                let bank = banks.bank(label);
                bank[rng.index(bank.len())].clone()
            };
            let summary: Vec<String> = pattern.iter().map(|l| pick(*l)).collect();
            let mut document: Vec<String> = (0..3).map(|_| pick(N)).collect();
            document.extend(summary.iter().cloned());
            document.push(pick(R));
            CorpusRecord::new(format!("case-{i:03}"), document.join(" "), summary.join(" "))
                .with_gold(LabelSequence::new(pattern.to_vec()))
        })
        .collect()
}
