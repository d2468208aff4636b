use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dialogue::Turn;

use super::model::{MAX_SCORE, MIN_SCORE};
use super::MetricError;

/// One human-scored history/response pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedExample {
    pub dialogue_id: String,
    pub history: Vec<Turn>,
    pub response: Turn,
    pub human_score: f64,
}

impl AnnotatedExample {
    fn validate(&self) -> Result<(), String> {
        if !(MIN_SCORE..=MAX_SCORE).contains(&self.human_score) {
            return Err(format!(
                "human_score {} outside [{MIN_SCORE}, {MAX_SCORE}]",
                self.human_score
            ));
        }
        if self.response.text.trim().is_empty() {
            return Err("response text is empty".into());
        }
        Ok(())
    }
}

/// Parses annotated JSONL; blank lines are skipped, errors name the line.
pub fn read_annotations<R: BufRead>(reader: R) -> Result<Vec<AnnotatedExample>, MetricError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| MetricError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: AnnotatedExample = serde_json::from_str(&line).map_err(|e| MetricError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        ex.validate()
            .map_err(|message| MetricError::Parse { line: line_no, message })?;
        out.push(ex);
    }
    Ok(out)
}

pub fn read_annotations_path(path: &Path) -> Result<Vec<AnnotatedExample>, MetricError> {
    let file = File::open(path).map_err(|e| MetricError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    read_annotations(BufReader::new(file))
}

pub fn write_annotations<W: Write>(mut out: W, examples: &[AnnotatedExample]) -> std::io::Result<()> {
    for ex in examples {
        serde_json::to_writer(&mut out, ex)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Merges rows that share dialogue id, history and response (one row per
/// annotator) into one row carrying the mean score. First-appearance order
/// is kept.
pub fn average_annotations(examples: &[AnnotatedExample]) -> Vec<AnnotatedExample> {
    let mut groups: Vec<(AnnotatedExample, f64, usize)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for ex in examples {
        let key = serde_json::to_string(&(&ex.dialogue_id, &ex.history, &ex.response)).expect("key serializes");
        match index.get(&key) {
            Some(&g) => {
                groups[g].1 += ex.human_score;
                groups[g].2 += 1;
            }
            None => {
                index.insert(key, groups.len());
                groups.push((ex.clone(), ex.human_score, 1));
            }
        }
    }
    groups
        .into_iter()
        .map(|(mut ex, sum, n)| {
            ex.human_score = sum / n as f64;
            ex
        })
        .collect()
}
