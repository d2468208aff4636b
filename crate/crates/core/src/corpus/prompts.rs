use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concepts::FIRST_NAMES_TXT;

use super::io::CorpusError;

/// Contexts at or below this many words need mid-text punctuation.
pub const MIN_WORDS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    TooShort,
    NoName,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TooShort => "too-short",
            RejectReason::NoName => "no-name",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RejectReason {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "too-short" => Ok(RejectReason::TooShort),
            "no-name" => Ok(RejectReason::NoName),
            _ => Err(format!("unknown reject reason {s:?}")),
        }
    }
}

/// Whitespace-separated tokens that contain at least one letter or digit.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace()
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .count()
}

/// True when a comma, period or semicolon occurs before the text's final
/// run of punctuation. Trailing whitespace and terminal punctuation never
/// count.
pub fn has_mid_punctuation(text: &str) -> bool {
    text.trim_end_matches(|c: char| !c.is_alphanumeric())
        .contains([',', '.', ';'])
}

/// Person-name detection over whitespace tokens.
///
/// A token is a name if it is in the first-name gazetteer (case-sensitive),
/// or if it is capitalized and does not start a sentence. "I" and its
/// contractions are never names.
#[derive(Debug, Clone)]
pub struct NameDetector {
    names: HashSet<String>,
}

impl NameDetector {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        NameDetector {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    /// The shipped gazetteer.
    pub fn bundled() -> Self {
        NameDetector::new(
            FIRST_NAMES_TXT
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_gazetteer_name(&self, word: &str) -> bool {
        self.names.contains(word)
    }

    /// Detected names in order of appearance.
    pub fn find_names<'t>(&self, text: &'t str) -> Vec<&'t str> {
        let mut out = Vec::new();
        let mut sentence_start = true;
        for raw in text.split_whitespace() {
            let word = strip_possessive(raw.trim_matches(|c: char| !c.is_alphanumeric()));
            if !word.is_empty() {
                let capitalized = word.chars().next().is_some_and(char::is_uppercase);
                if self.names.contains(word) || (capitalized && !sentence_start && !is_first_person(word)) {
                    out.push(word);
                }
                sentence_start = false;
            }
            let closing = raw.trim_end_matches(['"', '\'', '’', '”', ')', ']']);
            if closing.ends_with(['.', '!', '?']) {
                sentence_start = true;
            }
        }
        out
    }

    pub fn has_name(&self, text: &str) -> bool {
        !self.find_names(text).is_empty()
    }
}

fn strip_possessive(word: &str) -> &str {
    word.strip_suffix("'s")
        .or_else(|| word.strip_suffix("’s"))
        .unwrap_or(word)
}

fn is_first_person(word: &str) -> bool {
    let w = word.replace('’', "'");
    matches!(w.as_str(), "I" | "I'm" | "I'll" | "I've" | "I'd")
}

/// Keep/reject decision for one context.
pub fn select_prompt(text: &str, names: &NameDetector) -> Result<(), RejectReason> {
    if word_count(text) <= MIN_WORDS && !has_mid_punctuation(text) {
        return Err(RejectReason::TooShort);
    }
    if !names.has_name(text) {
        return Err(RejectReason::NoName);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptContext {
    pub id: String,
    pub text: String,
}

/// Reads `id<TAB>context` lines. Blank lines are skipped; a line without a
/// tab is an error naming its line number.
pub fn read_contexts<R: BufRead>(reader: R) -> impl Iterator<Item = Result<PromptContext, CorpusError>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                return Some(Err(CorpusError::Parse {
                    location: format!("line {line_no}"),
                    message: e.to_string(),
                }))
            }
        };
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            return None;
        }
        Some(match line.split_once('\t') {
            Some((id, text)) => Ok(PromptContext {
                id: id.to_owned(),
                text: text.to_owned(),
            }),
            None => Err(CorpusError::Parse {
                location: format!("line {line_no}"),
                message: "expected id<TAB>context".to_owned(),
            }),
        })
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSummary {
    pub kept: u64,
    pub too_short: u64,
    pub no_name: u64,
}

/// Splits contexts into the kept stream (`id<TAB>context`) and the rejected
/// stream (`id<TAB>context<TAB>reason`).
pub fn select_prompts<I, K, J>(
    contexts: I,
    names: &NameDetector,
    kept: &mut K,
    rejected: &mut J,
) -> Result<PromptSummary, CorpusError>
where
    I: IntoIterator<Item = Result<PromptContext, CorpusError>>,
    K: Write,
    J: Write,
{
    let io_err = |e: io::Error| CorpusError::Parse {
        location: "output".to_owned(),
        message: e.to_string(),
    };
    let mut summary = PromptSummary::default();
    for ctx in contexts {
        let ctx = ctx?;
        match select_prompt(&ctx.text, names) {
            Ok(()) => {
                summary.kept += 1;
                writeln!(kept, "{}\t{}", ctx.id, ctx.text).map_err(io_err)?;
            }
            Err(reason) => {
                match reason {
                    RejectReason::TooShort => summary.too_short += 1,
                    RejectReason::NoName => summary.no_name += 1,
                }
                writeln!(rejected, "{}\t{}\t{}", ctx.id, ctx.text, reason).map_err(io_err)?;
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRACY: &str = "Tracy performed her function. Their employer gave them a raise";
    const ROBIN: &str = "Robin stopped eating the food to save room for dessert";
    const RAIN: &str = "It rained heavily for the whole afternoon, flooding every street.";

    #[test]
    fn examples() {
        let names = NameDetector::bundled();
        assert_eq!(select_prompt(TRACY, &names), Ok(()));
        assert_eq!(word_count(ROBIN), 10);
        assert_eq!(select_prompt(ROBIN, &names), Err(RejectReason::TooShort));
        assert_eq!(select_prompt(RAIN, &names), Err(RejectReason::NoName));
    }

    #[test]
    fn terminal_punctuation_is_ignored() {
        assert!(!has_mid_punctuation("Robin went home."));
        assert!(!has_mid_punctuation("Robin went home...  "));
        assert!(has_mid_punctuation("Robin went home, then slept."));
        assert!(!has_mid_punctuation(""));
    }

    #[test]
    fn long_contexts_pass_length() {
        let text = "Kai walked to the store and bought some bread and milk for the family dinner tonight";
        assert!(word_count(text) > MIN_WORDS);
        assert_eq!(select_prompt(text, &NameDetector::bundled()), Ok(()));
    }

    #[test]
    fn name_fallback() {
        let names = NameDetector::new(Vec::<String>::new());
        assert_eq!(
            names.find_names("Yesterday Zelda left. Then I went, and I'm here."),
            ["Zelda"]
        );
        assert!(names.find_names("Yesterday it rained.").is_empty());
        assert_eq!(NameDetector::bundled().find_names("Tracy's dog barked."), ["Tracy"]);
    }

    #[test]
    fn tsv_io() {
        let input = format!("t1\t{TRACY}\n\nr1\t{ROBIN}\n");
        let (mut kept, mut rej) = (Vec::new(), Vec::new());
        let s = select_prompts(
            read_contexts(input.as_bytes()),
            &NameDetector::bundled(),
            &mut kept,
            &mut rej,
        )
        .unwrap();
        assert_eq!(
            s,
            PromptSummary {
                kept: 1,
                too_short: 1,
                no_name: 0
            }
        );
        assert_eq!(String::from_utf8(kept).unwrap(), format!("t1\t{TRACY}\n"));
        assert_eq!(String::from_utf8(rej).unwrap(), format!("r1\t{ROBIN}\ttoo-short\n"));
    }

    #[test]
    fn tsv_missing_tab() {
        let err = read_contexts("ok\tfine\nbroken line\n".as_bytes())
            .collect::<Result<Vec<_>, _>>()
            .unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
    }
}
