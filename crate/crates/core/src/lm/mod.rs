//! Language-model scores from external scorer processes or services.
//!
//! Scorers speak a JSON-lines protocol (see [`protocol`]) over a child
//! process's stdio or over HTTP. Built-in scorers cover symbolic-only runs
//! ([`NullScorer`]) and tests ([`EchoScorer`], [`HashScorer`]).

pub mod protocol;

mod http;
mod stdio;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concepts::tokenize;
use crate::dialogue::Turn;

pub use http::HttpScorer;
pub use stdio::StdioScorer;

/// Environment variable naming the default scorer endpoint.
pub const SCORER_ENV: &str = "CSDIAL_SCORER";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_RETRIES: u32 = 2;
pub const DEFAULT_SEPARATOR: &str = "\n";

/// Summed log-probability of a text and the scorer's token count for it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LmScore {
    pub logprob_sum: f64,
    pub num_tokens: u64,
}

impl LmScore {
    /// Mean per-token log-probability.
    pub fn mean(&self) -> f64 {
        self.logprob_sum / self.num_tokens as f64
    }
}

#[derive(Debug, Error)]
pub enum LmError {
    #[error("empty text at request {index}")]
    EmptyText { index: usize },
    #[error("scorer {endpoint}: no reply within {after:?}")]
    Timeout { endpoint: String, after: Duration },
    #[error("scorer {endpoint}: {message}")]
    Transport { endpoint: String, message: String },
    #[error("protocol error: {message}; payload: {payload}")]
    Protocol { message: String, payload: String },
    #[error("scorer rejected request {id}: {message}")]
    Scorer { id: String, message: String },
    #[error("{last} (gave up after {attempts} attempts)")]
    Exhausted {
        attempts: u32,
        #[source]
        last: Box<LmError>,
    },
    #[error("invalid scorer endpoint: {0}")]
    Endpoint(String),
}

impl LmError {
    pub(crate) fn after_attempts(self, attempts: u32) -> LmError {
        LmError::Exhausted {
            attempts,
            last: Box::new(self),
        }
    }
}

pub(crate) fn check_texts(texts: &[&str]) -> Result<(), LmError> {
    match texts.iter().position(|t| t.trim().is_empty()) {
        Some(index) => Err(LmError::EmptyText { index }),
        None => Ok(()),
    }
}

/// Anything that can score texts. Results are positionally aligned with the
/// inputs; a failure anywhere fails the whole batch.
pub trait LmScorer: Send + Sync {
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LmScore>, LmError>;

    fn score(&self, text: &str) -> Result<LmScore, LmError> {
        Ok(self.score_batch(&[text])?.remove(0))
    }

    /// True for the null scorer, whose zero scores stand in for "no LM".
    fn is_null(&self) -> bool {
        false
    }

    fn name(&self) -> String;
}

/// Always `logprob_sum = 0` over one token, so every LM feature is 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullScorer;

impl LmScorer for NullScorer {
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LmScore>, LmError> {
        check_texts(texts)?;
        Ok(vec![
            LmScore {
                logprob_sum: 0.0,
                num_tokens: 1
            };
            texts.len()
        ])
    }

    fn is_null(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "null".to_owned()
    }
}

fn token_count(text: &str) -> u64 {
    (tokenize(text).len() as u64).max(1)
}

/// Test scorer: `logprob_sum = -num_tokens` with the toolkit tokenizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoScorer;

impl LmScorer for EchoScorer {
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LmScore>, LmError> {
        check_texts(texts)?;
        Ok(texts
            .iter()
            .map(|t| {
                let n = token_count(t);
                LmScore {
                    logprob_sum: -(n as f64),
                    num_tokens: n,
                }
            })
            .collect())
    }

    fn name(&self) -> String {
        "echo".to_owned()
    }
}

/// Deterministic stand-in LM: every token gets a log-probability in
/// `[-10.49, -0.5]` derived from an FNV-1a hash of its lowercase form.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashScorer;

impl HashScorer {
    pub fn token_logprob(token: &str) -> f64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in token.to_lowercase().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        -(0.5 + (h % 1000) as f64 / 100.0)
    }
}

impl LmScorer for HashScorer {
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LmScore>, LmError> {
        check_texts(texts)?;
        Ok(texts
            .iter()
            .map(|t| {
                let toks = tokenize(t);
                LmScore {
                    logprob_sum: toks.iter().map(|k| Self::token_logprob(&k.surface)).sum(),
                    num_tokens: toks.len().max(1) as u64,
                }
            })
            .collect())
    }

    fn name(&self) -> String {
        "hash".to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    Null,
    Echo,
    Hash,
    /// Shell command of a JSON-lines scorer process.
    Stdio(String),
    /// Base URL of a scorer service.
    Http(String),
}

/// Where and how to reach a scorer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScorerEndpoint {
    pub transport: Transport,
    pub timeout: Duration,
    pub retries: u32,
}

impl ScorerEndpoint {
    pub fn new(transport: Transport) -> Self {
        ScorerEndpoint {
            transport,
            timeout: DEFAULT_TIMEOUT,
            retries: DEFAULT_RETRIES,
        }
    }

    pub fn null() -> Self {
        Self::new(Transport::Null)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Result<Self, LmError> {
        if timeout.is_zero() {
            return Err(LmError::Endpoint("timeout must be positive".into()));
        }
        self.timeout = timeout;
        Ok(self)
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    /// Endpoint named by [`SCORER_ENV`], if set and non-empty.
    pub fn from_env() -> Option<Result<Self, LmError>> {
        let raw = std::env::var(SCORER_ENV).ok()?;
        (!raw.trim().is_empty()).then(|| raw.parse())
    }

    pub fn connect(&self) -> Result<Box<dyn LmScorer>, LmError> {
        Ok(match &self.transport {
            Transport::Null => Box::new(NullScorer),
            Transport::Echo => Box::new(EchoScorer),
            Transport::Hash => Box::new(HashScorer),
            Transport::Stdio(cmd) => Box::new(StdioScorer::new(cmd.clone(), self.timeout, self.retries)),
            Transport::Http(url) => Box::new(HttpScorer::new(url, self.timeout, self.retries)?),
        })
    }
}

impl FromStr for ScorerEndpoint {
    type Err = LmError;

    /// `null`, `echo`, `hash`, an `http://` or `https://` URL, `stdio:<command>`,
    /// or a bare command.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let transport = match s {
            "" => return Err(LmError::Endpoint("empty endpoint".into())),
            "null" => Transport::Null,
            "echo" => Transport::Echo,
            "hash" => Transport::Hash,
            _ if s.starts_with("http://") || s.starts_with("https://") => Transport::Http(s.to_owned()),
            _ => {
                let cmd = s.strip_prefix("stdio:").unwrap_or(s).trim();
                if cmd.is_empty() {
                    return Err(LmError::Endpoint("empty scorer command".into()));
                }
                Transport::Stdio(cmd.to_owned())
            }
        };
        Ok(ScorerEndpoint::new(transport))
    }
}

impl fmt::Display for ScorerEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.transport {
            Transport::Null => f.write_str("null"),
            Transport::Echo => f.write_str("echo"),
            Transport::Hash => f.write_str("hash"),
            Transport::Stdio(cmd) => write!(f, "stdio:{cmd}"),
            Transport::Http(url) => f.write_str(url),
        }
    }
}

pub fn score_text(scorer: &dyn LmScorer, text: &str) -> Result<LmScore, LmError> {
    scorer.score(text)
}

pub fn batch_score(scorer: &dyn LmScorer, texts: &[&str]) -> Result<Vec<LmScore>, LmError> {
    scorer.score_batch(texts)
}

/// History turns joined by `separator`, followed by the response.
pub fn concat_history(history: &[Turn], response: &Turn, separator: &str) -> String {
    let mut out = String::new();
    for t in history {
        out.push_str(&t.text);
        out.push_str(separator);
    }
    out.push_str(&response.text);
    out
}

/// Scores of the response alone and of history + response, from one batch.
pub fn score_pair(
    scorer: &dyn LmScorer,
    history: &[Turn],
    response: &Turn,
    separator: &str,
) -> Result<(LmScore, LmScore), LmError> {
    let concat = concat_history(history, response, separator);
    let scores = scorer.score_batch(&[&response.text, &concat])?;
    Ok((scores[0], scores[1]))
}
