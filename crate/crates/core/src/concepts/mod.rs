//! Turn text into candidate concepts.
//!
//! The pipeline is tokenize, tag, keep nouns/verbs/adjectives, drop
//! stopwords, lemmatize. The tagger sits behind [`PosTagger`] so a
//! statistical tagger can replace the bundled lexicon tagger.

mod lemma;
mod resources;
mod tagger;
mod tokenize;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::kg::Concept;

pub use lemma::{Lemmatizer, Stopwords};
pub use resources::{
    bundled_lemmatizer, bundled_stopwords, bundled_tagger, ResourceError, FIRST_NAMES_TXT, LEMMA_EXCEPTIONS_TSV,
    LEXICON_TSV, STOPWORDS_TXT,
};
pub use tagger::{tag_pos, LexiconTagger, PosTag, PosTagger, TaggedToken};
pub use tokenize::{tokenize, Token};

/// Deduplicated, ordered concepts of one text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptSet(BTreeSet<Concept>);

impl ConceptSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, c: Concept) -> bool {
        self.0.insert(c)
    }

    pub fn contains(&self, c: &str) -> bool {
        self.0.contains(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Concept> {
        self.0.iter()
    }

    pub fn union(&self, other: &ConceptSet) -> ConceptSet {
        ConceptSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|c| c.as_str().to_owned()).collect()
    }

    /// Builds a set from plain words, panicking on invalid concepts.
    /// Meant for fixtures.
    pub fn of<'a, I: IntoIterator<Item = &'a str>>(words: I) -> Self {
        words
            .into_iter()
            .map(|w| Concept::new(w).expect("valid concept"))
            .collect()
    }
}

impl FromIterator<Concept> for ConceptSet {
    fn from_iter<I: IntoIterator<Item = Concept>>(iter: I) -> Self {
        ConceptSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ConceptSet {
    type Item = &'a Concept;
    type IntoIter = std::collections::btree_set::Iter<'a, Concept>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Tagger + lemmatizer + stopword list. Cheap to clone and safe to share
/// across threads.
#[derive(Clone)]
pub struct ConceptExtractor {
    tagger: Arc<dyn PosTagger>,
    lemmatizer: Arc<Lemmatizer>,
    stopwords: Arc<Stopwords>,
}

impl ConceptExtractor {
    pub fn new(tagger: Arc<dyn PosTagger>, lemmatizer: Arc<Lemmatizer>, stopwords: Arc<Stopwords>) -> Self {
        ConceptExtractor {
            tagger,
            lemmatizer,
            stopwords,
        }
    }

    /// Uses the resources shipped in `data/`.
    pub fn bundled() -> Self {
        let b = resources::bundled();
        ConceptExtractor {
            tagger: b.tagger.clone(),
            lemmatizer: b.lemmatizer.clone(),
            stopwords: b.stopwords.clone(),
        }
    }

    pub fn tagger(&self) -> &dyn PosTagger {
        self.tagger.as_ref()
    }

    pub fn lemmatizer(&self) -> &Lemmatizer {
        &self.lemmatizer
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn tag(&self, text: &str) -> Vec<TaggedToken> {
        tag_pos(self.tagger.as_ref(), &tokenize(text))
    }

    /// Lemmas of the content words of `text` that are not stopwords.
    pub fn extract(&self, text: &str) -> ConceptSet {
        let mut set = ConceptSet::new();
        for tagged in self.tag(text) {
            if !tagged.pos.is_content() {
                continue;
            }
            let lower = tagged.token.surface.to_lowercase();
            if !lower.chars().any(char::is_alphabetic) || !lower.chars().all(|c| c.is_alphabetic() || c == '-') {
                continue;
            }
            if self.stopwords.contains(&lower) {
                continue;
            }
            let lemma = self.lemmatizer.lemmatize(&lower, tagged.pos);
            if self.stopwords.contains(&lemma) {
                continue;
            }
            if let Ok(concept) = Concept::new(&lemma) {
                set.insert(concept);
            }
        }
        set
    }
}

impl Default for ConceptExtractor {
    fn default() -> Self {
        Self::bundled()
    }
}

impl std::fmt::Debug for ConceptExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConceptExtractor")
            .field("stopwords", &self.stopwords.len())
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doctor_exchange() {
        let ex = ConceptExtractor::bundled();
        assert_eq!(
            ex.extract("Hi, I want to find a doctor").to_strings(),
            ["doctor", "find", "want"]
        );
        assert_eq!(
            ex.extract("What kind of doctor are you looking for? A general doctor or a specialist?")
                .to_strings(),
            ["doctor", "general", "look", "specialist"]
        );
    }

    #[test]
    fn all_stopwords() {
        assert!(ConceptExtractor::bundled().extract("the of and").is_empty());
    }

    #[test]
    fn digits_never_concepts() {
        let ex = ConceptExtractor::bundled();
        assert!(ex.extract("4:30 2nd 1990s").is_empty());
    }

    #[test]
    fn bundled_stopword_count() {
        assert_eq!(bundled_stopwords().len(), 179);
    }
}
