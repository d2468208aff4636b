//! Workloads shared by the benchmarks.

use csdial::lm::HashScorer;
use csdial::synthetic::{generate, SyntheticConfig, SyntheticSet};
use csdial::{ConceptSet, Dialogue, FeatureVector};

/// A synthetic graph with dialogues over its vocabulary.
pub struct Workload {
    pub set: SyntheticSet,
    pub dialogues: Vec<Dialogue>,
}

impl Workload {
    pub fn new(examples: usize, vocabulary: usize, triples: usize) -> Self {
        let config = SyntheticConfig {
            examples,
            vocabulary,
            triples,
            ..SyntheticConfig::default()
        };
        let set = generate(&config, &HashScorer, 11).expect("synthetic set");
        let dialogues = set
            .examples
            .iter()
            .map(|e| {
                let mut turns = e.history.clone();
                turns.push(e.response.clone());
                Dialogue::new(e.dialogue_id.clone(), None, turns)
            })
            .collect();
        Workload { set, dialogues }
    }

    /// Concept sets of the last history turn and the response, per example.
    pub fn pairs(&self) -> Vec<(ConceptSet, ConceptSet)> {
        let ex = csdial::ConceptExtractor::bundled();
        self.set
            .examples
            .iter()
            .map(|e| {
                let last = e.history.last().expect("history");
                (ex.extract(&last.text), ex.extract(&e.response.text))
            })
            .collect()
    }

    pub fn training(&self) -> Vec<(FeatureVector, f64)> {
        self.set.training_pairs()
    }
}
