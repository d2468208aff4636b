use std::sync::{Arc, OnceLock};

use thiserror::Error;

use super::{Lemmatizer, LexiconTagger, Stopwords};

pub const STOPWORDS_TXT: &str = include_str!("../../data/stopwords.txt");
pub const LEXICON_TSV: &str = include_str!("../../data/lexicon.tsv");
pub const LEMMA_EXCEPTIONS_TSV: &str = include_str!("../../data/lemma_exceptions.tsv");
pub const FIRST_NAMES_TXT: &str = include_str!("../../data/first_names.txt");

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("{resource} line {line}: {message}")]
    Format {
        resource: &'static str,
        line: usize,
        message: String,
    },
}

/// Tab-split, non-comment, non-blank lines with 1-based line numbers.
pub(crate) fn parse_tsv_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(str::trim).collect()))
}

pub(crate) struct Bundled {
    pub(crate) tagger: Arc<LexiconTagger>,
    pub(crate) lemmatizer: Arc<Lemmatizer>,
    pub(crate) stopwords: Arc<Stopwords>,
}

pub(crate) fn bundled() -> &'static Bundled {
    static BUNDLED: OnceLock<Bundled> = OnceLock::new();
    BUNDLED.get_or_init(|| {
        let tagger = LexiconTagger::from_tsv(LEXICON_TSV).expect("bundled lexicon parses");
        let lemmatizer = Lemmatizer::new(LEMMA_EXCEPTIONS_TSV, tagger.words()).expect("bundled lemma exceptions parse");
        Bundled {
            tagger: Arc::new(tagger),
            lemmatizer: Arc::new(lemmatizer),
            stopwords: Arc::new(Stopwords::from_text(STOPWORDS_TXT)),
        }
    })
}

/// The shipped lexicon tagger.
pub fn bundled_tagger() -> &'static LexiconTagger {
    &bundled().tagger
}

pub fn bundled_lemmatizer() -> &'static Lemmatizer {
    &bundled().lemmatizer
}

pub fn bundled_stopwords() -> &'static Stopwords {
    &bundled().stopwords
}
