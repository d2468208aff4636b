//! JSON-lines wire format shared by the stdio and HTTP transports.
//!
//! Request: `{"id": string, "text": string}`.
//! Reply: `{"id": string, "logprob_sum": float, "num_tokens": int}`, or
//! `{"id": string, "error": string}` when the scorer rejects a request.

use std::collections::HashMap;

use serde::Serialize;
use serde_json::Value;

use super::{LmError, LmScore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreRequest<'a> {
    pub id: String,
    pub text: &'a str,
}

/// A decoded reply line.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Score { id: String, score: LmScore },
    Error { id: String, message: String },
}

impl Reply {
    pub fn id(&self) -> &str {
        match self {
            Reply::Score { id, .. } | Reply::Error { id, .. } => id,
        }
    }
}

fn protocol(message: impl Into<String>, payload: &str) -> LmError {
    LmError::Protocol {
        message: message.into(),
        payload: payload.to_owned(),
    }
}

/// Decodes one reply object. `payload` is the raw text quoted in errors.
pub fn decode_reply(value: &Value, payload: &str) -> Result<Reply, LmError> {
    let obj = value
        .as_object()
        .ok_or_else(|| protocol("reply is not a JSON object", payload))?;
    let id = obj
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| protocol("reply has no string \"id\"", payload))?
        .to_owned();
    if let Some(err) = obj.get("error") {
        let message = err.as_str().map_or_else(|| err.to_string(), str::to_owned);
        return Ok(Reply::Error { id, message });
    }
    let logprob_sum = obj
        .get("logprob_sum")
        .and_then(Value::as_f64)
        .ok_or_else(|| protocol("reply has no numeric \"logprob_sum\"", payload))?;
    let num_tokens = obj
        .get("num_tokens")
        .and_then(Value::as_u64)
        .ok_or_else(|| protocol("reply has no non-negative integer \"num_tokens\"", payload))?;
    Ok(Reply::Score {
        id,
        score: LmScore {
            logprob_sum,
            num_tokens,
        },
    })
}

pub fn decode_line(line: &str) -> Result<Reply, LmError> {
    let value: Value = serde_json::from_str(line).map_err(|e| protocol(format!("invalid JSON: {e}"), line))?;
    decode_reply(&value, line)
}

/// Rejects scores that break the `LmScore` invariants.
pub fn validate_score(score: LmScore, null: bool, payload: &str) -> Result<LmScore, LmError> {
    if score.num_tokens < 1 {
        return Err(protocol("num_tokens must be at least 1", payload));
    }
    if !score.logprob_sum.is_finite() {
        return Err(protocol("logprob_sum must be finite", payload));
    }
    if score.logprob_sum > 0.0 && !null {
        return Err(protocol("logprob_sum must not be positive", payload));
    }
    Ok(score)
}

/// Matches replies to request ids and returns scores in request order.
/// Replies may arrive in any order; unknown or repeated ids are protocol
/// errors. The first scorer-side error is reported once all replies are in.
pub struct ReplyCollector {
    slots: HashMap<String, usize>,
    scores: Vec<Option<LmScore>>,
    pending: usize,
    first_error: Option<LmError>,
}

impl ReplyCollector {
    pub fn new(ids: &[String]) -> Self {
        ReplyCollector {
            slots: ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect(),
            scores: vec![None; ids.len()],
            pending: ids.len(),
            first_error: None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.pending == 0
    }

    pub fn accept(&mut self, reply: Reply, payload: &str) -> Result<(), LmError> {
        let Some(&slot) = self.slots.get(reply.id()) else {
            return Err(protocol(format!("reply for unknown id {:?}", reply.id()), payload));
        };
        if self.scores[slot].is_some() {
            return Err(protocol(format!("duplicate reply for id {:?}", reply.id()), payload));
        }
        match reply {
            Reply::Score { score, .. } => {
                self.scores[slot] = Some(validate_score(score, false, payload)?);
            }
            Reply::Error { id, message } => {
                // Park a placeholder so a repeated id is still caught.
                self.scores[slot] = Some(LmScore::default());
                self.first_error.get_or_insert(LmError::Scorer { id, message });
            }
        }
        self.pending -= 1;
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<LmScore>, LmError> {
        if let Some(e) = self.first_error {
            return Err(e);
        }
        self.scores
            .into_iter()
            .map(|s| s.ok_or_else(|| protocol("missing reply", "")))
            .collect()
    }
}
