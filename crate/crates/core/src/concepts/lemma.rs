use std::collections::{HashMap, HashSet};

use super::resources::{parse_tsv_lines, ResourceError};
use super::PosTag;

/// Suffix-stripping lemmatizer with an irregular-form table.
///
/// Candidate stems are generated from regular English inflection rules and
/// accepted only when they are known words. Adjective stems must be known
/// adjectives. Words with no known candidate stay as they are, unless the
/// word is itself unknown, in which case the preferred rule is applied
/// blindly. The result is iterated to a fixed point, so lemmatizing a lemma
/// is a no-op.
#[derive(Debug, Clone, Default)]
pub struct Lemmatizer {
    exceptions: HashMap<(String, PosTag), String>,
    known: HashMap<String, PosTag>,
}

impl Lemmatizer {
    /// `exceptions_tsv` holds `form<TAB>pos<TAB>lemma` lines; `vocabulary`
    /// maps known words to their most frequent coarse tag.
    pub fn new<'a, I>(exceptions_tsv: &str, vocabulary: I) -> Result<Self, ResourceError>
    where
        I: IntoIterator<Item = (&'a str, PosTag)>,
    {
        let mut exceptions = HashMap::new();
        for (line_no, fields) in parse_tsv_lines(exceptions_tsv) {
            let [form, pos, lemma] = fields.as_slice() else {
                return Err(ResourceError::Format {
                    resource: "lemma exceptions",
                    line: line_no,
                    message: "expected form<TAB>pos<TAB>lemma".into(),
                });
            };
            let pos = pos.parse::<PosTag>().map_err(|message| ResourceError::Format {
                resource: "lemma exceptions",
                line: line_no,
                message,
            })?;
            exceptions.insert((form.to_lowercase(), pos), lemma.to_lowercase());
        }
        let mut known: HashMap<String, PosTag> = vocabulary.into_iter().map(|(w, t)| (w.to_owned(), t)).collect();
        for ((_, pos), lemma) in &exceptions {
            known.entry(lemma.clone()).or_insert(*pos);
        }
        Ok(Lemmatizer { exceptions, known })
    }

    /// Lowercase lemma of `surface` read as `pos`. OTHER tokens are only
    /// lowercased.
    pub fn lemmatize(&self, surface: &str, pos: PosTag) -> String {
        let mut word = surface.to_lowercase();
        if pos == PosTag::Other {
            return word;
        }
        // Every rule shortens the word or maps it through the exception
        // table, whose targets are fixed points; the bound is a backstop.
        for _ in 0..8 {
            let next = self.step(&word, pos);
            if next == word {
                break;
            }
            word = next;
        }
        word
    }

    pub fn exception_entries(&self) -> impl Iterator<Item = (&str, PosTag, &str)> {
        self.exceptions.iter().map(|((f, p), l)| (f.as_str(), *p, l.as_str()))
    }

    fn step(&self, word: &str, pos: PosTag) -> String {
        if let Some(lemma) = self.exceptions.get(&(word.to_owned(), pos)) {
            return lemma.clone();
        }
        let candidates = match pos {
            PosTag::Noun => noun_candidates(word),
            PosTag::Verb => verb_candidates(word),
            PosTag::Adj => adj_candidates(word),
            PosTag::Other => Vec::new(),
        };
        let valid = |c: &String| match self.known.get(c.as_str()) {
            Some(&tag) => pos != PosTag::Adj || tag == PosTag::Adj,
            None => false,
        };
        if let Some(found) = candidates.iter().find(|c| valid(c)) {
            return found.clone();
        }
        if self.known.contains_key(word) {
            return word.to_owned();
        }
        candidates.into_iter().next().unwrap_or_else(|| word.to_owned())
    }
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|c| is_vowel(c) || c == b'y')
}

/// Stem shaped like consonant-vowel-consonant ("hop", "us"): such stems
/// would have doubled their final consonant, so an undoubled inflection
/// points at a silent-e base ("hoping" -> "hope").
fn ends_cvc(s: &str) -> bool {
    let b = s.as_bytes();
    let n = b.len();
    if n < 2 {
        return false;
    }
    let last = b[n - 1];
    if is_vowel(last) || matches!(last, b'w' | b'x' | b'y') {
        return false;
    }
    if !is_vowel(b[n - 2]) {
        return false;
    }
    n == 2 || !is_vowel(b[n - 3])
}

fn doubled_final(s: &str) -> Option<u8> {
    let b = s.as_bytes();
    let n = b.len();
    (n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1])).then_some(b[n - 1])
}

/// Candidate bases for a stem left after removing "-ing" / "-ed" / "-er".
fn stem_candidates(stem: &str, out: &mut Vec<String>) {
    if let Some(c) = doubled_final(stem) {
        let undoubled = stem[..stem.len() - 1].to_owned();
        if matches!(c, b'l' | b's' | b'z' | b'f') {
            out.push(stem.to_owned());
            out.push(undoubled);
        } else {
            out.push(undoubled);
            out.push(stem.to_owned());
        }
    } else if ends_cvc(stem) {
        out.push(format!("{stem}e"));
        out.push(stem.to_owned());
    } else {
        out.push(stem.to_owned());
        out.push(format!("{stem}e"));
    }
}

fn s_candidates(word: &str, out: &mut Vec<String>) {
    if word.len() < 3 || word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return;
    }
    let Some(stem) = word.strip_suffix('s') else {
        return;
    };
    out.push(stem.to_owned());
    if let Some(s) = word.strip_suffix("ies") {
        out.push(format!("{s}y"));
    }
    if let Some(s) = word.strip_suffix("es") {
        out.push(s.to_owned());
        if let Some(c) = doubled_final(s) {
            if c == b'z' {
                out.push(s[..s.len() - 1].to_owned());
            }
        }
    }
}

fn noun_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    s_candidates(word, &mut out);
    if let Some(s) = word.strip_suffix("ves") {
        out.push(format!("{s}f"));
        out.push(format!("{s}fe"));
    }
    if let Some(s) = word.strip_suffix("men") {
        if !s.is_empty() {
            out.push(format!("{s}man"));
        }
    }
    out
}

fn verb_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(stem) = word.strip_suffix("ing") {
        if stem.len() >= 2 && has_vowel(stem) {
            stem_candidates(stem, &mut out);
        }
    } else if let Some(stem) = word.strip_suffix("ied") {
        if !stem.is_empty() {
            out.push(format!("{stem}y"));
        }
    } else if let Some(base) = word.strip_suffix("eed").map(|s| format!("{s}ee")) {
        // "agreed" -> "agree", but "need"/"feed"/"seed" are bases themselves.
        if base.len() >= 4 {
            out.push(base);
        }
    } else if let Some(stem) = word.strip_suffix("ed") {
        if stem.len() >= 2 && has_vowel(stem) {
            stem_candidates(stem, &mut out);
        }
    } else {
        s_candidates(word, &mut out);
    }
    out
}

fn adj_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    for suffix in ["est", "er"] {
        let Some(stem) = word.strip_suffix(suffix) else {
            continue;
        };
        if stem.len() < 2 || !has_vowel(stem) {
            continue;
        }
        if let Some(s) = stem.strip_suffix('i') {
            out.push(format!("{s}y"));
        }
        stem_candidates(stem, &mut out);
        break;
    }
    out
}

/// A frozen set of words never treated as concepts.
#[derive(Debug, Clone, Default)]
pub struct Stopwords {
    words: HashSet<String>,
    ordered: Vec<String>,
}

impl Stopwords {
    pub fn from_text(text: &str) -> Self {
        let ordered: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Stopwords {
            words: ordered.iter().cloned().collect(),
            ordered,
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    /// Entries in file order.
    pub fn words(&self) -> &[String] {
        &self.ordered
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }
}
