//! Blocking HTTP client for the scorer wire protocol.

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use reqwest::blocking::{Client, RequestBuilder};
use reqwest::{StatusCode, Url};
use serde::de::DeserializeOwned;

use super::{
    Classifier, ClassifyRequest, ClassifyResponse, ErrorBody, GenerateRequest, GenerateResponse,
    GeneratedCandidate, Handshake, Scorer, ScorerError,
};
use crate::labels::LabelProbs;

const BODY_EXCERPT_CHARS: usize = 200;

#[derive(Debug, Clone)]
pub struct HttpScorerOptions {
    /// Per-attempt timeout.
    pub timeout: Duration,
    /// Extra attempts after the first one fails with a transport error or a
    /// 5xx status.
    pub retries: u32,
    /// First backoff delay; doubles after every failed attempt.
    pub initial_backoff: Duration,
}

impl Default for HttpScorerOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_millis(30_000),
            retries: 2,
            initial_backoff: Duration::from_millis(200),
        }
    }
}

impl HttpScorerOptions {
    /// Upper bound on wall-clock time a single call may take.
    pub fn worst_case(&self) -> Duration {
        let attempts = self.retries + 1;
        let backoff: Duration = (0..self.retries)
            .map(|i| self.initial_backoff * 2u32.saturating_pow(i))
            .sum();
        self.timeout * attempts + backoff
    }
}

/// Counting semaphore sized from the handshake's `max_concurrency`.
#[derive(Debug)]
struct Limiter {
    available: Mutex<u32>,
    freed: Condvar,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn new(permits: u32) -> Self {
        Self {
            available: Mutex::new(permits.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut available = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *available == 0 {
            available = self.freed.wait(available).unwrap_or_else(|e| e.into_inner());
        }
        *available -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut available = self.0.available.lock().unwrap_or_else(|e| e.into_inner());
        *available += 1;
        self.0.freed.notify_one();
    }
}

#[derive(Debug)]
pub struct HttpScorer {
    base: Url,
    client: Client,
    options: HttpScorerOptions,
    handshake: Handshake,
    limiter: Limiter,
}

enum Attempt<T> {
    Done(Result<T, ScorerError>),
    Retry(ScorerError),
}

fn excerpt(body: &str) -> String {
    if let Ok(parsed) = serde_json::from_str::<ErrorBody>(body) {
        return parsed.error;
    }
    body.chars().take(BODY_EXCERPT_CHARS).collect()
}

fn transport_error(err: &reqwest::Error) -> ScorerError {
    if err.is_timeout() {
        ScorerError::Timeout
    } else {
        ScorerError::Unreachable(err.to_string())
    }
}

impl HttpScorer {
    /// Validates `endpoint`, performs the handshake and sizes the in-flight
    /// limit from it.
    pub fn connect(endpoint: &str, options: HttpScorerOptions) -> Result<Self, ScorerError> {
        let mut base = Url::parse(endpoint)
            .map_err(|e| ScorerError::Unreachable(format!("invalid endpoint {endpoint:?}: {e}")))?;
        if !matches!(base.scheme(), "http" | "https") {
            return Err(ScorerError::Unreachable(format!(
                "unsupported endpoint scheme {:?}",
                base.scheme()
            )));
        }
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        let client = Client::builder()
            .timeout(options.timeout)
            .build()
            .map_err(|e| ScorerError::Unreachable(e.to_string()))?;
        let mut scorer = Self {
            base,
            client,
            options,
            handshake: Handshake {
                name: String::new(),
                version: String::new(),
                max_concurrency: 1,
                supports_inline_label_probs: false,
            },
            limiter: Limiter::new(1),
        };
        let handshake: Handshake = scorer.call(|c, url| c.get(url), "v1/handshake")?;
        scorer.limiter = Limiter::new(handshake.max_concurrency);
        scorer.handshake = handshake;
        Ok(scorer)
    }

    pub fn cached_handshake(&self) -> &Handshake {
        &self.handshake
    }

    fn attempt<T: DeserializeOwned>(&self, request: RequestBuilder) -> Attempt<T> {
        let response = match request.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(transport_error(&e)),
        };
        let status = response.status();
        let body = match response.text() {
            Ok(b) => b,
            Err(e) => return Attempt::Retry(transport_error(&e)),
        };
        if status.is_success() {
            return Attempt::Done(
                serde_json::from_str(&body).map_err(|e| ScorerError::InvalidResponse(e.to_string())),
            );
        }
        let err = ScorerError::Protocol {
            status: status.as_u16(),
            body: excerpt(&body),
        };
        if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
            Attempt::Retry(err)
        } else {
            Attempt::Done(Err(err))
        }
    }

    fn call<T: DeserializeOwned>(
        &self,
        build: impl Fn(&Client, Url) -> RequestBuilder,
        path: &str,
    ) -> Result<T, ScorerError> {
        let url = self
            .base
            .join(path)
            .map_err(|e| ScorerError::Unreachable(e.to_string()))?;
        let _permit = self.limiter.acquire();
        let mut delay = self.options.initial_backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(build(&self.client, url.clone())) {
                Attempt::Done(result) => return result,
                Attempt::Retry(err) if attempt >= self.options.retries => return Err(err),
                Attempt::Retry(_) => {
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        }
    }
}

impl Classifier for HttpScorer {
    fn classify(&self, sentences: &[String]) -> Result<Vec<LabelProbs>, ScorerError> {
        let body = ClassifyRequest {
            sentences: sentences.to_vec(),
        };
        let response: ClassifyResponse = self.call(|c, url| c.post(url).json(&body), "v1/classify")?;
        if response.probs.len() != sentences.len() {
            return Err(ScorerError::InvalidResponse(format!(
                "expected {} probability vectors, got {}",
                sentences.len(),
                response.probs.len()
            )));
        }
        Ok(response.probs)
    }
}

impl Scorer for HttpScorer {
    fn handshake(&self) -> Result<Handshake, ScorerError> {
        self.call(|c, url| c.get(url), "v1/handshake")
    }

    fn generate(&self, request: &GenerateRequest) -> Result<Vec<GeneratedCandidate>, ScorerError> {
        let response: GenerateResponse =
            self.call(|c, url| c.post(url).json(request), "v1/generate")?;
        Ok(response.candidates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_budget() {
        let opts = HttpScorerOptions {
            timeout: Duration::from_millis(100),
            retries: 3,
            initial_backoff: Duration::from_millis(200),
        };
        assert_eq!(opts.worst_case(), Duration::from_millis(400 + 200 + 400 + 800));
    }

    #[test]
    fn excerpt_prefers_error_field() {
        assert_eq!(excerpt(r#"{"error":"boom"}"#), "boom");
        assert_eq!(excerpt(&"x".repeat(500)).len(), BODY_EXCERPT_CHARS);
    }

    #[test]
    fn rejects_bad_endpoints() {
        assert!(matches!(
            HttpScorer::connect("not a url", HttpScorerOptions::default()),
            Err(ScorerError::Unreachable(_))
        ));
        assert!(matches!(
            HttpScorer::connect("ftp://host/", HttpScorerOptions::default()),
            Err(ScorerError::Unreachable(_))
        ));
    }

    #[test]
    fn unreachable_host_fails_after_retries() {
        let opts = HttpScorerOptions {
            timeout: Duration::from_millis(200),
            retries: 1,
            initial_backoff: Duration::from_millis(10),
        };
        let started = std::time::Instant::now();
        let err = HttpScorer::connect("http://127.0.0.1:1", opts.clone()).unwrap_err();
        assert!(matches!(err, ScorerError::Unreachable(_) | ScorerError::Timeout));
        assert!(started.elapsed() <= opts.worst_case() + Duration::from_millis(500));
    }
}
