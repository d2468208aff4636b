use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::Value;

use super::protocol::{decode_reply, ReplyCollector, ScoreRequest};
use super::{check_texts, LmError, LmScore, LmScorer};

/// Scorer service reached with `POST {base}/score`. A single request is
/// sent as a JSON object, a batch as a JSON array; the reply mirrors the
/// shape.
pub struct HttpScorer {
    url: String,
    client: reqwest::blocking::Client,
    timeout: Duration,
    retries: u32,
    next_id: AtomicU64,
}

enum Failure {
    Transient(LmError),
    Fatal(LmError),
}

impl HttpScorer {
    pub fn new(base: &str, timeout: Duration, retries: u32) -> Result<Self, LmError> {
        let base = base.trim_end_matches('/');
        let url = if base.ends_with("/score") {
            base.to_owned()
        } else {
            format!("{base}/score")
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| LmError::Transport {
                endpoint: url.clone(),
                message: e.to_string(),
            })?;
        Ok(HttpScorer {
            url,
            client,
            timeout,
            retries,
            next_id: AtomicU64::new(0),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn attempt(&self, texts: &[&str]) -> Result<Vec<LmScore>, Failure> {
        let ids: Vec<String> = texts
            .iter()
            .map(|_| self.next_id.fetch_add(1, Ordering::Relaxed).to_string())
            .collect();
        let requests: Vec<ScoreRequest> = ids
            .iter()
            .zip(texts)
            .map(|(id, text)| ScoreRequest { id: id.clone(), text })
            .collect();
        let body = if requests.len() == 1 {
            serde_json::to_string(&requests[0])
        } else {
            serde_json::to_string(&requests)
        }
        .expect("request serializes");

        let transport = |message: String| {
            Failure::Transient(LmError::Transport {
                endpoint: self.url.clone(),
                message,
            })
        };
        let response = self
            .client
            .post(&self.url)
            .header("content-type", "application/json")
            .body(body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    Failure::Transient(LmError::Timeout {
                        endpoint: self.url.clone(),
                        after: self.timeout,
                    })
                } else {
                    transport(e.to_string())
                }
            })?;
        let status = response.status();
        let text = response.text().map_err(|e| transport(e.to_string()))?;
        if !status.is_success() {
            let snippet: String = text.chars().take(200).collect();
            return Err(transport(format!("HTTP {status}: {snippet}")));
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| {
            Failure::Fatal(LmError::Protocol {
                message: format!("invalid JSON: {e}"),
                payload: text.clone(),
            })
        })?;
        let replies: Vec<Value> = match value {
            Value::Array(items) => items,
            single => vec![single],
        };
        let mut collector = ReplyCollector::new(&ids);
        for v in &replies {
            let payload = v.to_string();
            let reply = decode_reply(v, &payload).map_err(Failure::Fatal)?;
            collector.accept(reply, &payload).map_err(Failure::Fatal)?;
        }
        if !collector.is_complete() {
            return Err(Failure::Fatal(LmError::Protocol {
                message: format!("expected {} replies, got {}", ids.len(), replies.len()),
                payload: text,
            }));
        }
        collector.finish().map_err(Failure::Fatal)
    }
}

impl LmScorer for HttpScorer {
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LmScore>, LmError> {
        check_texts(texts)?;
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let mut attempt = 0;
        loop {
            match self.attempt(texts) {
                Ok(scores) => return Ok(scores),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Transient(e)) => {
                    if attempt >= self.retries {
                        return Err(e.after_attempts(attempt + 1));
                    }
                    log::warn!("scorer {}: {e}; retrying", self.url);
                    attempt += 1;
                }
            }
        }
    }

    fn name(&self) -> String {
        self.url.clone()
    }
}
