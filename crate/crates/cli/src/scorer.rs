use std::time::Duration;

use anyhow::{bail, Context, Result};
use structsum_core::bridge::{HttpScorer, HttpScorerOptions, MockScorer, MockScorerConfig, Scorer, SentenceBanks};

use crate::GlobalOpts;

/// Resolves `mock` or an http(s) endpoint to a scorer.
pub fn open(spec: &str, global: &GlobalOpts) -> Result<Box<dyn Scorer>> {
    if spec == "mock" {
        let sentence_bank = match &global.mock_banks {
            Some(path) => {
                let json = std::fs::read_to_string(path)
                    .with_context(|| format!("reading sentence banks {}", path.display()))?;
                SentenceBanks::from_json(&json).with_context(|| format!("parsing {}", path.display()))?
            }
            None => SentenceBanks::bundled(),
        };
        if !(global.mock_noise.is_finite() && global.mock_noise >= 0.0) {
            bail!("--mock-noise must be a non-negative number");
        }
        return Ok(Box::new(MockScorer::new(MockScorerConfig {
            seed: global.seed,
            sentence_bank,
            noise: global.mock_noise,
            eos_after: global.mock_eos_after,
        })));
    }
    if spec.starts_with("http://") || spec.starts_with("https://") {
        if !(global.scorer_timeout.is_finite() && global.scorer_timeout > 0.0) {
            bail!("--scorer-timeout must be positive");
        }
        let options = HttpScorerOptions {
            timeout: Duration::from_secs_f64(global.scorer_timeout),
            retries: global.scorer_retries,
            ..HttpScorerOptions::default()
        };
        let scorer = HttpScorer::connect(spec, options).with_context(|| format!("connecting to {spec}"))?;
        return Ok(Box::new(scorer));
    }
    bail!("scorer must be `mock` or an http(s) URL, got {spec:?}")
}
