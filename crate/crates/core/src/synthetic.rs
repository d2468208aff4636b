//! Synthetic annotated dialogues with a known scoring function.
//!
//! Real human annotations are not redistributable, so evaluation code is
//! exercised on data whose ground truth is planted: dialogues are drawn
//! over a random graph of invented words, featurized with the normal
//! pipeline, and scored as
//! `1 + 9 * sigmoid((ws * sum(z_symbolic) + wn * sum(z_neural)) / norm + noise)`
//! where `z` are population z-scores of the features and `norm` keeps the
//! latent at unit scale.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::concepts::ConceptExtractor;
use crate::dialogue::Turn;
use crate::kg::{ConceptGraph, Triple};
use crate::lm::LmScorer;
use crate::metric::{AnnotatedExample, Feature, FeatureVector, Featurizer, MetricError, Standardizer};

const RELATIONS: [&str; 5] = ["RelatedTo", "UsedFor", "AtLocation", "IsA", "Causes"];
const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z", "sh"];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];
const FILLERS: [&str; 8] = ["the", "a", "and", "of", "to", "with", "i", "you"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub examples: usize,
    pub vocabulary: usize,
    pub triples: usize,
    /// Weight of each symbolic feature's z-score in the latent.
    pub symbolic_weight: f64,
    /// Weight of each neural feature's z-score in the latent.
    pub neural_weight: f64,
    /// Standard deviation of the Gaussian noise added to the latent.
    pub noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            examples: 1000,
            vocabulary: 300,
            triples: 900,
            symbolic_weight: 2.0,
            neural_weight: 1.0,
            noise: 0.2,
        }
    }
}

/// A generated graph, its annotated examples and their features.
#[derive(Debug, Clone)]
pub struct SyntheticSet {
    pub graph: ConceptGraph,
    pub examples: Vec<AnnotatedExample>,
    pub features: Vec<FeatureVector>,
    /// Noise-free latent of each example; higher means a higher score.
    pub latent: Vec<f64>,
}

impl SyntheticSet {
    /// Features paired with scores, as the regressor consumes them.
    pub fn training_pairs(&self) -> Vec<(FeatureVector, f64)> {
        self.features
            .iter()
            .zip(&self.examples)
            .map(|(f, e)| (*f, e.human_score))
            .collect()
    }
}

/// Invented words the extractor keeps verbatim as concepts.
pub fn vocabulary(n: usize, extractor: &ConceptExtractor, rng: &mut impl Rng) -> Vec<String> {
    let mut words: Vec<String> = Vec::with_capacity(n);
    let mut seen = std::collections::HashSet::new();
    let mut attempts = 0usize;
    while words.len() < n {
        attempts += 1;
        assert!(attempts < 1000 * (n + 10), "could not invent {n} distinct words");
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(NUCLEI.choose(rng).unwrap());
        }
        if rng.gen_bool(0.5) {
            w.push_str(["n", "k", "m", "p"].choose(rng).unwrap());
        }
        if seen.contains(&w) {
            continue;
        }
        let set = extractor.extract(&w);
        if set.len() == 1 && set.contains(&w) {
            seen.insert(w.clone());
            words.push(w);
        }
    }
    words
}

fn random_graph(words: &[String], triples: usize, rng: &mut impl Rng) -> ConceptGraph {
    let mut out = Vec::with_capacity(triples);
    while out.len() < triples {
        let h = words.choose(rng).unwrap();
        let t = words.choose(rng).unwrap();
        if h != t {
            out.push(Triple::parse(h, RELATIONS.choose(rng).unwrap(), t));
        }
    }
    ConceptGraph::from_triples(out)
}

fn sentence(words: &[&str], rng: &mut impl Rng) -> String {
    let mut parts: Vec<&str> = Vec::new();
    for w in words {
        if rng.gen_bool(0.3) {
            parts.push(FILLERS.choose(rng).unwrap());
        }
        parts.push(w);
    }
    let mut s = parts.join(" ");
    s.push('.');
    s
}

/// Generates a synthetic set. LM features come from `scorer`; with the
/// null scorer they are constant and carry no signal.
pub fn generate(config: &SyntheticConfig, scorer: &dyn LmScorer, seed: u64) -> Result<SyntheticSet, MetricError> {
    if config.examples < 2 || config.vocabulary < 2 {
        return Err(MetricError::Config(
            "synthetic set needs at least 2 examples and 2 words".into(),
        ));
    }
    let extractor = ConceptExtractor::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = vocabulary(config.vocabulary, &extractor, &mut rng);
    let graph = random_graph(&words, config.triples, &mut rng);

    let mut examples = Vec::with_capacity(config.examples);
    for i in 0..config.examples {
        // Per-example affinity: the chance a response word is a graph
        // neighbor of the history, so one-hop counts spread widely.
        let affinity: f64 = rng.gen();
        let history_turns = rng.gen_range(1..=3);
        let mut history_words: Vec<&str> = Vec::new();
        let mut history = Vec::with_capacity(history_turns);
        for t in 0..history_turns {
            let k = rng.gen_range(2..=6);
            let ws: Vec<&str> = (0..k).map(|_| words.choose(&mut rng).unwrap().as_str()).collect();
            history_words.extend(&ws);
            let speaker = if t % 2 == 0 { "speaker" } else { "friend" };
            history.push(Turn::new(speaker, sentence(&ws, &mut rng)));
        }
        let k = rng.gen_range(1..=10);
        let mut resp: Vec<&str> = Vec::with_capacity(k);
        for _ in 0..k {
            let anchor = *history_words.choose(&mut rng).unwrap();
            let linked: Vec<&str> = graph
                .neighbors(anchor)
                .map(|(t, _)| {
                    if t.head().as_str() == anchor {
                        t.tail().as_str()
                    } else {
                        t.head().as_str()
                    }
                })
                .collect();
            if rng.gen_bool(affinity) && !linked.is_empty() {
                resp.push(linked.choose(&mut rng).unwrap());
            } else {
                resp.push(words.choose(&mut rng).unwrap());
            }
        }
        let speaker = if history_turns % 2 == 0 { "speaker" } else { "friend" };
        examples.push(AnnotatedExample {
            dialogue_id: format!("synthetic-{i:05}"),
            history,
            response: Turn::new(speaker, sentence(&resp, &mut rng)),
            human_score: 0.0,
        });
    }

    let featurizer = Featurizer::new(&graph, scorer).with_extractor(extractor);
    let pairs: Vec<(&[Turn], &Turn)> = examples.iter().map(|e| (e.history.as_slice(), &e.response)).collect();
    let features = featurizer.featurize_many(&pairs)?;

    let latent = latent_scores(&features, config);
    let noise = Normal::new(0.0, config.noise.max(0.0)).map_err(|e| MetricError::Config(format!("noise: {e}")))?;
    for (ex, z) in examples.iter_mut().zip(&latent) {
        let s = z + noise.sample(&mut rng);
        ex.human_score = (1.0 + 9.0 / (1.0 + (-s).exp())).clamp(1.0, 10.0);
    }
    Ok(SyntheticSet {
        graph,
        examples,
        features,
        latent,
    })
}

/// The generator's noise-free latent for each feature vector.
pub fn latent_scores(features: &[FeatureVector], config: &SyntheticConfig) -> Vec<f64> {
    let mut latent = vec![0.0; features.len()];
    let mut weight_sq = 0.0;
    for f in Feature::ALL {
        let w = if f.is_symbolic() {
            config.symbolic_weight
        } else {
            config.neural_weight
        };
        weight_sq += w * w;
        let column: Vec<f64> = features.iter().map(|v| v.get(f)).collect();
        let st = Standardizer::fit(column.iter().copied());
        for (l, x) in latent.iter_mut().zip(&column) {
            *l += w * st.apply(*x);
        }
    }
    let norm = weight_sq.sqrt().max(f64::MIN_POSITIVE);
    latent.iter().map(|l| l / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{HashScorer, NullScorer};

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            examples: 60,
            vocabulary: 40,
            triples: 80,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn deterministic_by_seed() {
        let a = generate(&small(), &NullScorer, 4).unwrap();
        let b = generate(&small(), &NullScorer, 4).unwrap();
        assert_eq!(a.examples, b.examples);
        assert_eq!(a.features, b.features);
        let c = generate(&small(), &NullScorer, 5).unwrap();
        assert_ne!(a.examples, c.examples);
    }

    #[test]
    fn scores_in_range_and_features_vary() {
        let set = generate(&small(), &HashScorer, 1).unwrap();
        assert!(set.examples.iter().all(|e| (1.0..=10.0).contains(&e.human_score)));
        let distinct = |f: Feature| {
            let mut v: Vec<u64> = set.features.iter().map(|x| x.get(f).to_bits()).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        for f in Feature::ALL {
            assert!(distinct(f) > 3, "{f} barely varies");
        }
    }

    #[test]
    fn vocabulary_words_are_their_own_concepts() {
        let ex = ConceptExtractor::bundled();
        let words = vocabulary(50, &ex, &mut ChaCha8Rng::seed_from_u64(0));
        for w in &words {
            assert_eq!(ex.extract(w).to_strings(), [w.clone()]);
        }
    }

    #[test]
    fn null_scorer_latent_ignores_lm() {
        let set = generate(&small(), &NullScorer, 2).unwrap();
        assert!(set.features.iter().all(|f| f.lm_resp == 0.0 && f.lm_concat == 0.0));
    }
}
