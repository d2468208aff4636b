use serde::{Deserialize, Serialize};

/// A word or punctuation token and its index within the turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

// Longest first so "'ll" is tried before "'l"-like prefixes.
const CLITICS: [&str; 7] = ["n't", "'re", "'ll", "'ve", "'s", "'d", "'m"];

/// Rule-based word/punctuation split.
///
/// Whitespace separates chunks. Inside a chunk, words are maximal runs of
/// alphanumerics, where `'`, `’`, `-`, `.`, `:`, `,` and `/` are kept only
/// when flanked by alphanumerics on both sides ("4:30", "e.g", "don't").
/// Every other character is punctuation; runs of the same punctuation
/// character form one token, so `...` stays together. English clitics are
/// split from the word they attach to: `don't` becomes `do` + `n't`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out: Vec<String> = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out.into_iter()
        .enumerate()
        .map(|(position, surface)| Token { surface, position })
        .collect()
}

const JOINERS: [char; 7] = ['\'', '’', '-', '.', ':', ',', '/'];

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let n = chars.len();
    let in_word = |i: usize| {
        let c = chars[i];
        c.is_alphanumeric()
            || (JOINERS.contains(&c)
                && i > 0
                && i + 1 < n
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric())
    };
    let mut i = 0;
    while i < n {
        let start = i;
        if in_word(i) {
            while i < n && in_word(i) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match split_clitic(&word) {
                Some((stem, clitic)) => {
                    out.push(stem.to_owned());
                    out.push(clitic.to_owned());
                }
                None => out.push(word),
            }
        } else {
            while i < n && chars[i] == chars[start] && !in_word(i) {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        }
    }
}

fn split_clitic(word: &str) -> Option<(&str, &str)> {
    let normalized = word.replace('’', "'").to_lowercase();
    for clitic in CLITICS {
        if normalized.ends_with(clitic) && normalized.len() > clitic.len() {
            // Count chars, not bytes: the curly apostrophe is three bytes wide.
            let clitic_chars = clitic.chars().count();
            let split_at = word.char_indices().rev().nth(clitic_chars - 1).map(|(i, _)| i)?;
            if split_at == 0 {
                return None;
            }
            return Some((&word[..split_at], &word[split_at..]));
        }
    }
    None
}
