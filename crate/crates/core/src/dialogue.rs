//! Dialogue and turn types shared by the corpus and metric code.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    pub text: String,
}

impl Turn {
    pub fn new(speaker: impl Into<String>, text: impl Into<String>) -> Self {
        Turn {
            speaker: speaker.into(),
            text: text.into(),
        }
    }
}

/// An ordered exchange, optionally grounded in a prompt context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub context: Option<String>,
    pub turns: Vec<Turn>,
}

impl Dialogue {
    pub fn new(id: impl Into<String>, context: Option<String>, turns: Vec<Turn>) -> Self {
        Dialogue {
            id: id.into(),
            context,
            turns,
        }
    }

    /// Two speakers alternating, starting with `"speaker"` and answered by
    /// `"friend"`.
    pub fn alternating<S: AsRef<str>>(id: impl Into<String>, context: Option<String>, texts: &[S]) -> Self {
        let turns = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Turn::new(if i % 2 == 0 { "speaker" } else { "friend" }, t.as_ref()))
            .collect();
        Dialogue::new(id, context, turns)
    }
}
