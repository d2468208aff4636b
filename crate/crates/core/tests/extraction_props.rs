use std::collections::BTreeSet;

use csdial::concepts::{bundled_stopwords, tokenize, ConceptExtractor};
use proptest::prelude::*;

// Frozen copy of the NLTK English stopword list, in distribution order.
const NLTK_ENGLISH: &str = "i me my myself we our ours ourselves you you're you've you'll you'd your yours \
yourself yourselves he him his himself she she's her hers herself it it's its itself they them their theirs \
themselves what which who whom this that that'll these those am is are was were be been being have has had \
having do does did doing a an the and but if or because as until while of at by for with about against \
between into through during before after above below to from up down in out on off over under again further \
then once here there when where why how all any both each few more most other some such no nor not only own \
same so than too very s t can will just don don't should should've now d ll m o re ve y ain aren aren't \
couldn couldn't didn didn't doesn doesn't hadn hadn't hasn hasn't haven haven't isn isn't ma mightn mightn't \
mustn mustn't needn needn't shan shan't shouldn shouldn't wasn wasn't weren weren't won won't wouldn wouldn't";

const VOCAB: &[&str] = &[
    "doctor",
    "doctors",
    "looking",
    "looked",
    "find",
    "found",
    "want",
    "wanted",
    "general",
    "specialist",
    "hospital",
    "patient",
    "raise",
    "boss",
    "job",
    "celebrate",
    "happy",
    "happier",
    "children",
    "went",
    "running",
    "dog",
    "dogs",
    "bigger",
    "kind",
    "lot",
    "of",
    "the",
    "and",
    "I",
    "you",
    "are",
    "is",
    "don't",
    "I'm",
    "we're",
    "Tracy",
    "Robin",
    "ice-cream",
    "well-known",
    "4:30",
    "2nd",
    "e.g.",
    "really",
    "very",
    "food",
    "dessert",
    "room",
    "save",
    "eating",
    "stopped",
    "rewarded",
    "hard",
    "work",
    "proud",
    "earned",
];

fn sentence() -> impl Strategy<Value = String> {
    let word = prop::sample::select(VOCAB);
    let punct = prop::sample::select(vec!["", "", "", ",", ".", "?", "!", "...", "\""]);
    prop::collection::vec((word, punct), 0..20).prop_map(|ws| {
        ws.into_iter()
            .map(|(w, p)| format!("{w}{p}"))
            .collect::<Vec<_>>()
            .join(" ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn tokens_cover_every_visible_char(text in "[ -~\u{2019}\u{e9}\t\n]{0,80}") {
        let toks = tokenize(&text);
        let joined: String = toks.iter().map(|t| t.surface.as_str()).collect();
        let visible: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        prop_assert_eq!(joined, visible);
        for (i, t) in toks.iter().enumerate() {
            prop_assert_eq!(t.position, i);
            prop_assert!(!t.surface.is_empty());
        }
    }

    #[test]
    fn concepts_come_from_tokens(text in sentence()) {
        let ex = ConceptExtractor::bundled();
        let possible: BTreeSet<String> = ex
            .tag(&text)
            .into_iter()
            .map(|t| ex.lemmatizer().lemmatize(&t.token.surface, t.pos))
            .collect();
        for c in &ex.extract(&text) {
            prop_assert!(possible.contains(c.as_str()), "{c} has no source token");
        }
    }

    #[test]
    fn no_stopwords_and_lowercase(text in sentence()) {
        let ex = ConceptExtractor::bundled();
        for c in &ex.extract(&text) {
            prop_assert!(!bundled_stopwords().contains(c.as_str()), "{c}");
            prop_assert_eq!(c.as_str().to_lowercase(), c.as_str());
            prop_assert!(!c.as_str().chars().any(|ch| ch.is_whitespace() || ch.is_ascii_digit()));
        }
    }

    #[test]
    fn deterministic_and_case_insensitive(text in sentence()) {
        let ex = ConceptExtractor::bundled();
        let base = ex.extract(&text);
        prop_assert_eq!(&base, &ex.extract(&text));
        prop_assert_eq!(&base, &ex.extract(&text.to_ascii_uppercase()));
        prop_assert_eq!(&base, &ex.extract(&text.to_ascii_lowercase()));
    }

    #[test]
    fn arbitrary_text_is_safe(text in "\\PC{0,60}") {
        let ex = ConceptExtractor::bundled();
        for c in &ex.extract(&text) {
            prop_assert!(!bundled_stopwords().contains(c.as_str()));
        }
    }
}

#[test]
fn stopword_file_is_the_nltk_list() {
    let shipped: Vec<&str> = bundled_stopwords().words().iter().map(String::as_str).collect();
    let frozen: Vec<&str> = NLTK_ENGLISH.split_whitespace().collect();
    assert_eq!(frozen.len(), 179);
    assert_eq!(shipped, frozen);
}

#[test]
fn every_stopword_is_filtered_in_any_case() {
    let ex = ConceptExtractor::bundled();
    for w in bundled_stopwords().words() {
        for form in [w.clone(), w.to_uppercase(), format!("{w}.")] {
            let got = ex.extract(&form);
            assert!(
                got.iter().all(|c| !bundled_stopwords().contains(c.as_str())),
                "{form:?}"
            );
            // Contractions split off a base ("needn't" -> "need" + "n't")
            // that may be a concept; plain entries must vanish entirely.
            if !w.contains('\'') {
                assert!(got.is_empty(), "{form:?} -> {got:?}");
            }
        }
    }
    let plain: Vec<&str> = bundled_stopwords()
        .words()
        .iter()
        .map(String::as_str)
        .filter(|w| !w.contains('\''))
        .collect();
    assert!(ex.extract(&plain.join(" ")).is_empty());
}

#[test]
fn golden_concept_sets() {
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
    assert!(ex.extract("").is_empty());
}
