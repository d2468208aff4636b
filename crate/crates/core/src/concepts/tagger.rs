use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::resources::{parse_tsv_lines, ResourceError};
use super::Token;

/// Coarse part-of-speech classes relevant to concept extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Other,
}

impl PosTag {
    /// Nouns, verbs and adjectives are concept candidates.
    pub fn is_content(self) -> bool {
        !matches!(self, PosTag::Other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Other => "OTHER",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NOUN" => Ok(PosTag::Noun),
            "VERB" => Ok(PosTag::Verb),
            "ADJ" => Ok(PosTag::Adj),
            "OTHER" => Ok(PosTag::Other),
            _ => Err(format!("unknown POS tag {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: Token,
    pub pos: PosTag,
}

/// Assigns exactly one coarse tag per token.
pub trait PosTagger: Send + Sync {
    fn tag(&self, tokens: &[Token]) -> Vec<PosTag>;
}

pub fn tag_pos(tagger: &dyn PosTagger, tokens: &[Token]) -> Vec<TaggedToken> {
    let tags = tagger.tag(tokens);
    assert_eq!(tags.len(), tokens.len(), "tagger must emit one tag per token");
    tokens
        .iter()
        .cloned()
        .zip(tags)
        .map(|(token, pos)| TaggedToken { token, pos })
        .collect()
}

const ADJ_SUFFIXES: [&str; 8] = ["ous", "ful", "ive", "able", "ible", "less", "ish", "ical"];

// Head nouns of quantifier-like "N of" phrases ("what kind of", "a lot of").
const QUANTIFIER_NOUNS: [&str; 4] = ["kind", "sort", "lot", "bit"];

/// Lexicon lookup with suffix heuristics for unknown words.
///
/// Lookup is case-insensitive. Unknown words ending in `-ing`/`-ed` are
/// verbs, a handful of derivational suffixes mark adjectives, `-ly` marks
/// adverbs (OTHER) and anything else defaults to NOUN. Tokens without a
/// letter, with a digit, or with an apostrophe are OTHER. One contextual
/// rule demotes quantifier nouns followed by "of".
#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    lexicon: HashMap<String, PosTag>,
}

impl LexiconTagger {
    /// Parses `word<TAB>TAG` lines.
    pub fn from_tsv(text: &str) -> Result<Self, ResourceError> {
        let mut lexicon = HashMap::new();
        for (line_no, fields) in parse_tsv_lines(text) {
            let [word, tag] = fields.as_slice() else {
                return Err(ResourceError::Format {
                    resource: "lexicon",
                    line: line_no,
                    message: "expected word<TAB>tag".into(),
                });
            };
            let tag = tag.parse::<PosTag>().map_err(|message| ResourceError::Format {
                resource: "lexicon",
                line: line_no,
                message,
            })?;
            lexicon.insert(word.to_lowercase(), tag);
        }
        Ok(LexiconTagger { lexicon })
    }

    pub fn lookup(&self, word: &str) -> Option<PosTag> {
        self.lexicon.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }

    pub(crate) fn words(&self) -> impl Iterator<Item = (&str, PosTag)> {
        self.lexicon.iter().map(|(w, &t)| (w.as_str(), t))
    }

    fn tag_word(&self, lower: &str) -> PosTag {
        if !lower.chars().any(char::is_alphabetic) || lower.chars().any(|c| c.is_ascii_digit() || c == '\'' || c == '’')
        {
            return PosTag::Other;
        }
        if let Some(tag) = self.lookup(lower) {
            return tag;
        }
        let n = lower.chars().count();
        if (lower.ends_with("ing") && n > 4) || (lower.ends_with("ed") && n > 3) {
            PosTag::Verb
        } else if ADJ_SUFFIXES.iter().any(|s| lower.ends_with(s) && n > s.len() + 2) {
            PosTag::Adj
        } else if lower.ends_with("ly") && n > 4 {
            PosTag::Other
        } else {
            PosTag::Noun
        }
    }
}

impl PosTagger for LexiconTagger {
    fn tag(&self, tokens: &[Token]) -> Vec<PosTag> {
        let lower: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
        let mut tags: Vec<PosTag> = lower.iter().map(|w| self.tag_word(w)).collect();
        for i in 0..tags.len().saturating_sub(1) {
            if tags[i] == PosTag::Noun && lower[i + 1] == "of" && QUANTIFIER_NOUNS.contains(&lower[i].as_str()) {
                tags[i] = PosTag::Other;
            }
        }
        tags
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{bundled_tagger, tokenize};

    fn tags_of(text: &str) -> Vec<(String, PosTag)> {
        let toks = tokenize(text);
        tag_pos(bundled_tagger(), &toks)
            .into_iter()
            .map(|t| (t.token.surface, t.pos))
            .collect()
    }

    fn tag_for(tags: &[(String, PosTag)], word: &str) -> PosTag {
        tags.iter().find(|(w, _)| w == word).unwrap().1
    }

    #[test]
    fn golden_sentences() {
        let t = tags_of("Hi, I want to find a doctor");
        assert_eq!(tag_for(&t, "want"), PosTag::Verb);
        assert_eq!(tag_for(&t, "find"), PosTag::Verb);
        assert_eq!(tag_for(&t, "doctor"), PosTag::Noun);
        assert_eq!(tag_for(&t, "Hi"), PosTag::Other);

        let t = tags_of("A general doctor or a specialist?");
        assert_eq!(tag_for(&t, "general"), PosTag::Adj);
        assert_eq!(tag_for(&t, "doctor"), PosTag::Noun);
        assert_eq!(tag_for(&t, "specialist"), PosTag::Noun);
    }

    #[test]
    fn quantifier_rule() {
        let t = tags_of("What kind of doctor");
        assert_eq!(tag_for(&t, "kind"), PosTag::Other);
        let t = tags_of("She is kind");
        assert_ne!(tag_for(&t, "kind"), PosTag::Other);
    }

    #[test]
    fn unknown_words() {
        let t = tags_of("zorbing glimbed frobulous snarkly quux 42 n't");
        assert_eq!(tag_for(&t, "zorbing"), PosTag::Verb);
        assert_eq!(tag_for(&t, "glimbed"), PosTag::Verb);
        assert_eq!(tag_for(&t, "frobulous"), PosTag::Adj);
        assert_eq!(tag_for(&t, "snarkly"), PosTag::Other);
        assert_eq!(tag_for(&t, "quux"), PosTag::Noun);
        assert_eq!(tag_for(&t, "42"), PosTag::Other);
        assert_eq!(tag_for(&t, "n't"), PosTag::Other);
    }

    #[test]
    fn empty_input() {
        assert!(tag_pos(bundled_tagger(), &[]).is_empty());
    }

    #[test]
    fn bad_lexicon_line() {
        assert!(LexiconTagger::from_tsv("dog\tNOUN\ncat\n").is_err());
        assert!(LexiconTagger::from_tsv("dog\tNN\n").is_err());
    }
}
