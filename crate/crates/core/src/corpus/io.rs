use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{sync_channel, Receiver};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::de::{self, DeserializeSeed, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::dialogue::{Dialogue, Turn};

/// On-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One top-level object mapping id to `{"context", "speaker", "turns"}`.
    KeyedJson,
    /// One `{"id", "context", "turns": [{"speaker", "text"}]}` object per line.
    Jsonl,
}

impl CorpusFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            CorpusFormat::KeyedJson => "keyed-json",
            CorpusFormat::Jsonl => "jsonl",
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keyed-json" => Ok(CorpusFormat::KeyedJson),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            _ => Err(format!("unknown corpus format {s:?} (expected keyed-json or jsonl)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

/// Label of the partner turn in keyed-json dialogues.
pub const PARTNER_LABEL: &str = "friend";

#[derive(Debug, Serialize, Deserialize)]
struct KeyedEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context: Option<String>,
    #[serde(default = "default_speaker")]
    speaker: String,
    turns: Vec<String>,
}

fn default_speaker() -> String {
    "speaker".to_owned()
}

#[derive(Debug, Deserialize)]
struct JsonlEntry {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    context: Option<String>,
    turns: Vec<Turn>,
}

/// Drops whitespace-only turns; returns `None` when nothing is left.
fn clean(mut d: Dialogue) -> Option<Dialogue> {
    d.turns.retain(|t| !t.text.trim().is_empty());
    (!d.turns.is_empty()).then_some(d)
}

type Item = Result<Dialogue, CorpusError>;

/// Streaming dialogue reader. Dialogues are yielded in file order, one at a
/// time; dialogues left without turns are skipped and counted.
pub struct CorpusReader {
    inner: Inner,
    skipped_empty: Arc<AtomicU64>,
}

enum Inner {
    Jsonl {
        lines: Box<dyn BufRead + Send>,
        line_no: usize,
        buf: String,
        done: bool,
    },
    Keyed {
        rx: Receiver<Item>,
        worker: Option<JoinHandle<()>>,
    },
}

impl CorpusReader {
    pub fn open(path: &Path, format: CorpusFormat) -> Result<Self, CorpusError> {
        let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(Self::from_reader(BufReader::new(file), format))
    }

    pub fn from_reader<R: BufRead + Send + 'static>(reader: R, format: CorpusFormat) -> Self {
        let skipped_empty = Arc::new(AtomicU64::new(0));
        let inner = match format {
            CorpusFormat::Jsonl => Inner::Jsonl {
                lines: Box::new(reader),
                line_no: 0,
                buf: String::new(),
                done: false,
            },
            CorpusFormat::KeyedJson => {
                // Parsing runs on its own thread and hands dialogues over a
                // bounded channel, so memory stays flat for large files.
                let (tx, rx) = sync_channel::<Item>(256);
                let skipped = skipped_empty.clone();
                let worker = std::thread::spawn(move || {
                    let mut de = serde_json::Deserializer::from_reader(reader);
                    let sink = KeyedSink {
                        tx: &tx,
                        skipped: &skipped,
                    };
                    let result = sink.deserialize(&mut de).and_then(|()| de.end());
                    if let Err(e) = result {
                        if !e.to_string().starts_with(RECEIVER_GONE) {
                            let _ = tx.send(Err(CorpusError::Parse {
                                location: "keyed-json".to_owned(),
                                message: e.to_string(),
                            }));
                        }
                    }
                });
                Inner::Keyed {
                    rx,
                    worker: Some(worker),
                }
            }
        };
        CorpusReader { inner, skipped_empty }
    }

    /// Dialogues skipped because they had no non-empty turn. Final once the
    /// iterator is exhausted.
    pub fn skipped_empty(&self) -> u64 {
        self.skipped_empty.load(Ordering::Relaxed)
    }
}

impl Iterator for CorpusReader {
    type Item = Item;

    fn next(&mut self) -> Option<Item> {
        match &mut self.inner {
            Inner::Jsonl {
                lines,
                line_no,
                buf,
                done,
            } => loop {
                if *done {
                    return None;
                }
                buf.clear();
                *line_no += 1;
                match lines.read_line(buf) {
                    Ok(0) => {
                        *done = true;
                        return None;
                    }
                    Ok(_) => {}
                    Err(e) => {
                        *done = true;
                        return Some(Err(CorpusError::Parse {
                            location: format!("line {line_no}"),
                            message: e.to_string(),
                        }));
                    }
                }
                let line = buf.trim();
                if line.is_empty() {
                    continue;
                }
                let entry: JsonlEntry = match serde_json::from_str(line) {
                    Ok(e) => e,
                    Err(e) => {
                        *done = true;
                        return Some(Err(CorpusError::Parse {
                            location: format!("line {line_no}"),
                            message: e.to_string(),
                        }));
                    }
                };
                let id = entry.id.unwrap_or_else(|| format!("line{line_no}"));
                match clean(Dialogue::new(id, entry.context, entry.turns)) {
                    Some(d) => return Some(Ok(d)),
                    None => {
                        self.skipped_empty.fetch_add(1, Ordering::Relaxed);
                    }
                }
            },
            Inner::Keyed { rx, worker } => match rx.recv() {
                Ok(item) => Some(item),
                Err(_) => {
                    if let Some(w) = worker.take() {
                        let _ = w.join();
                    }
                    None
                }
            },
        }
    }
}

const RECEIVER_GONE: &str = "corpus reader dropped";

struct KeyedSink<'a> {
    tx: &'a std::sync::mpsc::SyncSender<Item>,
    skipped: &'a AtomicU64,
}

impl<'de> DeserializeSeed<'de> for KeyedSink<'_> {
    type Value = ();
    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<(), D::Error> {
        d.deserialize_map(self)
    }
}

impl<'de> Visitor<'de> for KeyedSink<'_> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object mapping dialogue ids to dialogues")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<(), A::Error> {
        while let Some(key) = map.next_key::<String>()? {
            let entry: KeyedEntry = map
                .next_value()
                .map_err(|e| de::Error::custom(format!("dialogue {key:?}: {e}")))?;
            let turns = entry
                .turns
                .into_iter()
                .enumerate()
                .map(|(i, text)| Turn {
                    speaker: if i % 2 == 0 {
                        entry.speaker.clone()
                    } else {
                        PARTNER_LABEL.to_owned()
                    },
                    text,
                })
                .collect();
            match clean(Dialogue::new(key, entry.context, turns)) {
                Some(d) => {
                    if self.tx.send(Ok(d)).is_err() {
                        return Err(de::Error::custom(RECEIVER_GONE));
                    }
                }
                None => {
                    self.skipped.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        Ok(())
    }
}

/// Reads a whole corpus into memory.
pub fn read_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Dialogue>, CorpusError> {
    CorpusReader::open(path, format)?.collect()
}

/// Reads a whole corpus from any reader.
pub fn read_corpus_from<R: Read + Send + 'static>(
    reader: R,
    format: CorpusFormat,
) -> Result<Vec<Dialogue>, CorpusError> {
    CorpusReader::from_reader(BufReader::new(reader), format).collect()
}

/// Streaming writer for either corpus format.
pub struct CorpusWriter<W: Write> {
    out: W,
    format: CorpusFormat,
    written: usize,
}

impl<W: Write> CorpusWriter<W> {
    pub fn new(out: W, format: CorpusFormat) -> Self {
        CorpusWriter {
            out,
            format,
            written: 0,
        }
    }

    pub fn write(&mut self, d: &Dialogue) -> io::Result<()> {
        match self.format {
            CorpusFormat::Jsonl => {
                serde_json::to_writer(&mut self.out, d)?;
                self.out.write_all(b"\n")?;
            }
            CorpusFormat::KeyedJson => {
                self.out
                    .write_all(if self.written == 0 { b"{\n  " } else { b",\n  " })?;
                let entry = KeyedEntry {
                    context: d.context.clone(),
                    speaker: d.turns.first().map_or_else(default_speaker, |t| t.speaker.clone()),
                    turns: d.turns.iter().map(|t| t.text.clone()).collect(),
                };
                serde_json::to_writer(&mut self.out, &d.id)?;
                self.out.write_all(b": ")?;
                serde_json::to_writer(&mut self.out, &entry)?;
            }
        }
        self.written += 1;
        Ok(())
    }

    /// Closes the top-level object (keyed-json) and returns the sink.
    pub fn finish(mut self) -> io::Result<W> {
        if self.format == CorpusFormat::KeyedJson {
            self.out.write_all(if self.written == 0 { b"{}\n" } else { b"\n}\n" })?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keyed(text: &str) -> Result<Vec<Dialogue>, CorpusError> {
        read_corpus_from(io::Cursor::new(text.as_bytes().to_vec()), CorpusFormat::KeyedJson)
    }

    fn jsonl(text: &str) -> Result<Vec<Dialogue>, CorpusError> {
        read_corpus_from(io::Cursor::new(text.as_bytes().to_vec()), CorpusFormat::Jsonl)
    }

    #[test]
    fn keyed_two_entries() {
        let ds =
            keyed(r#"{"a": {"context": "c", "speaker": "Tracy", "turns": ["x", "y", "z"]}, "b": {"turns": ["q"]}}"#)
                .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].id, "a");
        assert_eq!(ds[0].context.as_deref(), Some("c"));
        let speakers: Vec<&str> = ds[0].turns.iter().map(|t| t.speaker.as_str()).collect();
        assert_eq!(speakers, ["Tracy", "friend", "Tracy"]);
        assert_eq!(ds[1].id, "b");
        assert_eq!(ds[1].context, None);
    }

    #[test]
    fn keyed_error_names_key() {
        let err = keyed(r#"{"good": {"turns": ["x"]}, "bad": {"turns": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("\"bad\""), "{err}");
    }

    #[test]
    fn keyed_trailing_garbage() {
        assert!(keyed(r#"{} x"#).is_err());
    }

    #[test]
    fn empty_jsonl() {
        assert!(jsonl("").unwrap().is_empty());
        assert!(jsonl("\n\n").unwrap().is_empty());
    }

    #[test]
    fn jsonl_error_names_line() {
        let err = jsonl("{\"id\":\"a\",\"turns\":[]}\n{oops\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
    }

    #[test]
    fn empty_dialogues_skipped_and_counted() {
        let text = "{\"id\":\"a\",\"turns\":[{\"speaker\":\"s\",\"text\":\"  \"}]}\n{\"turns\":[{\"speaker\":\"s\",\"text\":\"hi\"}]}\n";
        let mut r = CorpusReader::from_reader(io::Cursor::new(text.as_bytes().to_vec()), CorpusFormat::Jsonl);
        let ds: Vec<Dialogue> = r.by_ref().collect::<Result<_, _>>().unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].id, "line2");
        assert_eq!(r.skipped_empty(), 1);
    }

    #[test]
    fn roundtrip_both_formats() {
        let ds = vec![
            Dialogue::alternating("x\"1", Some("ctx".into()), &["hello", "there"]),
            Dialogue::new("y", None, vec![Turn::new("speaker", "solo")]),
        ];
        for format in [CorpusFormat::Jsonl, CorpusFormat::KeyedJson] {
            let mut w = CorpusWriter::new(Vec::new(), format);
            for d in &ds {
                w.write(d).unwrap();
            }
            let bytes = w.finish().unwrap();
            let back = read_corpus_from(io::Cursor::new(bytes), format).unwrap();
            assert_eq!(back, ds, "{format}");
        }
    }

    #[test]
    fn empty_keyed_output() {
        let bytes = CorpusWriter::new(Vec::new(), CorpusFormat::KeyedJson).finish().unwrap();
        assert_eq!(bytes, b"{}\n");
    }

    #[test]
    fn early_drop_stops_worker() {
        let mut text = String::from("{");
        for i in 0..2000 {
            if i > 0 {
                text.push(',');
            }
            text.push_str(&format!("\"{i}\": {{\"turns\": [\"t\"]}}"));
        }
        text.push('}');
        let mut r = CorpusReader::from_reader(io::Cursor::new(text.into_bytes()), CorpusFormat::KeyedJson);
        assert_eq!(r.next().unwrap().unwrap().id, "0");
        drop(r);
    }
}
