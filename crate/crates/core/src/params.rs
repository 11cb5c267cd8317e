use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamsError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("top_p must lie in (0, 1], got {0}")]
    TopP(f64),
    #[error("min_tokens ({min}) exceeds max_tokens ({max})")]
    TokenRange { min: u32, max: u32 },
}

/// Decoding knobs forwarded to the generator. The selection algorithm reads
/// `num_candidates` and `max_tokens`; the rest is passed through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub num_candidates: u32,
    pub beam_size: u32,
    pub top_p: f64,
    pub min_tokens: u32,
    pub max_tokens: u32,
    pub length_penalty: f64,
    pub seed: u64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            num_candidates: 4,
            beam_size: 2,
            top_p: 0.9,
            min_tokens: 64,
            max_tokens: 256,
            length_penalty: 1.0,
            seed: 0,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.num_candidates == 0 {
            return Err(ParamsError::NotPositive("num_candidates"));
        }
        if self.beam_size == 0 {
            return Err(ParamsError::NotPositive("beam_size"));
        }
        if self.max_tokens == 0 {
            return Err(ParamsError::NotPositive("max_tokens"));
        }
        if self.length_penalty.is_nan() || self.length_penalty <= 0.0 {
            return Err(ParamsError::NotPositive("length_penalty"));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(ParamsError::TopP(self.top_p));
        }
        if self.min_tokens > self.max_tokens {
            return Err(ParamsError::TokenRange {
                min: self.min_tokens,
                max: self.max_tokens,
            });
        }
        Ok(())
    }
}
