use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concepts::{tokenize, ConceptExtractor, ConceptSet};
use crate::dialogue::Turn;
use crate::kg::ConceptGraph;
use crate::lm::{concat_history, LmError, LmScorer, DEFAULT_SEPARATOR};
use crate::matching::{match_pair, two_hop_count, DEFAULT_TWO_HOP_CAP};

/// One input column of the regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    OneHop,
    TwoHop,
    RespLen,
    LmResp,
    LmConcat,
}

impl Feature {
    pub const ALL: [Feature; 5] = [
        Feature::OneHop,
        Feature::TwoHop,
        Feature::RespLen,
        Feature::LmResp,
        Feature::LmConcat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::OneHop => "one_hop",
            Feature::TwoHop => "two_hop",
            Feature::RespLen => "resp_len",
            Feature::LmResp => "lm_resp",
            Feature::LmConcat => "lm_concat",
        }
    }

    pub fn is_symbolic(self) -> bool {
        matches!(self, Feature::OneHop | Feature::TwoHop | Feature::RespLen)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which feature columns a model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMask {
    /// `one_hop`, `two_hop`, `resp_len`.
    Symbolic,
    /// `lm_resp`, `lm_concat`.
    Neural,
    All,
}

impl FeatureMask {
    pub const ALL: [FeatureMask; 3] = [FeatureMask::All, FeatureMask::Symbolic, FeatureMask::Neural];

    pub fn features(self) -> &'static [Feature] {
        match self {
            FeatureMask::Symbolic => &Feature::ALL[..3],
            FeatureMask::Neural => &Feature::ALL[3..],
            FeatureMask::All => &Feature::ALL,
        }
    }

    pub fn contains(self, f: Feature) -> bool {
        self.features().contains(&f)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMask::Symbolic => "symbolic",
            FeatureMask::Neural => "neural",
            FeatureMask::All => "all",
        }
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMask {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(FeatureMask::Symbolic),
            "neural" => Ok(FeatureMask::Neural),
            "all" => Ok(FeatureMask::All),
            _ => Err(format!("unknown feature mask {s:?} (expected symbolic, neural or all)")),
        }
    }
}

/// Symbolic and neural features of one history/response pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub one_hop: u64,
    pub two_hop: u64,
    pub resp_len: u64,
    /// Mean per-token log-probability of the response.
    pub lm_resp: f64,
    /// Mean per-token log-probability of history followed by response.
    pub lm_concat: f64,
}

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        match f {
            Feature::OneHop => self.one_hop as f64,
            Feature::TwoHop => self.two_hop as f64,
            Feature::RespLen => self.resp_len as f64,
            Feature::LmResp => self.lm_resp,
            Feature::LmConcat => self.lm_concat,
        }
    }

    pub fn set(&mut self, f: Feature, value: f64) {
        match f {
            Feature::OneHop => self.one_hop = value as u64,
            Feature::TwoHop => self.two_hop = value as u64,
            Feature::RespLen => self.resp_len = value as u64,
            Feature::LmResp => self.lm_resp = value,
            Feature::LmConcat => self.lm_concat = value,
        }
    }

    /// Values of the features selected by `mask`, in canonical order.
    pub fn masked(&self, mask: FeatureMask) -> Vec<f64> {
        mask.features().iter().map(|&f| self.get(f)).collect()
    }
}

/// Which history turns feed the history concept set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryScope {
    /// Union over every history turn.
    #[default]
    All,
    /// The turn right before the response only.
    Last,
}

impl FromStr for HistoryScope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(HistoryScope::All),
            "last" => Ok(HistoryScope::Last),
            _ => Err(format!("unknown history scope {s:?} (expected all or last)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub two_hop_cap: u64,
    pub scope: HistoryScope,
    /// Joins history turns and the response for the concatenated LM score.
    pub separator: String,
    /// History/response pairs per scorer request batch.
    pub lm_batch: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            two_hop_cap: DEFAULT_TWO_HOP_CAP,
            scope: HistoryScope::All,
            separator: DEFAULT_SEPARATOR.to_owned(),
            lm_batch: 32,
        }
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("response text is empty")]
    EmptyResponse,
    #[error(transparent)]
    Lm(#[from] LmError),
}

/// Computes [`FeatureVector`]s against one graph and one scorer.
pub struct Featurizer<'a> {
    graph: &'a ConceptGraph,
    extractor: ConceptExtractor,
    scorer: &'a dyn LmScorer,
    config: FeatureConfig,
}

impl<'a> Featurizer<'a> {
    pub fn new(graph: &'a ConceptGraph, scorer: &'a dyn LmScorer) -> Self {
        Featurizer {
            graph,
            extractor: ConceptExtractor::bundled(),
            scorer,
            config: FeatureConfig::default(),
        }
    }

    pub fn with_config(mut self, config: FeatureConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_extractor(mut self, extractor: ConceptExtractor) -> Self {
        self.extractor = extractor;
        self
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    /// One-hop, two-hop and response length; the LM fields are left at 0.
    pub fn symbolic(&self, history: &[Turn], response: &Turn) -> Result<FeatureVector, FeatureError> {
        if response.text.trim().is_empty() {
            return Err(FeatureError::EmptyResponse);
        }
        let turns: &[Turn] = match self.config.scope {
            HistoryScope::All => history,
            HistoryScope::Last => &history[history.len().saturating_sub(1)..],
        };
        let mut earlier = ConceptSet::new();
        for t in turns {
            for c in &self.extractor.extract(&t.text) {
                earlier.insert(c.clone());
            }
        }
        let later = self.extractor.extract(&response.text);
        Ok(FeatureVector {
            one_hop: match_pair(self.graph, &earlier, &later).one_hop_count() as u64,
            two_hop: two_hop_count(self.graph, &earlier, &later, self.config.two_hop_cap).count,
            resp_len: tokenize(&response.text).len() as u64,
            lm_resp: 0.0,
            lm_concat: 0.0,
        })
    }

    pub fn featurize(&self, history: &[Turn], response: &Turn) -> Result<FeatureVector, FeatureError> {
        Ok(self.featurize_many(&[(history, response)])?.remove(0))
    }

    /// Symbolic features are computed in parallel; LM scores go to the
    /// scorer in batches of `lm_batch` pairs, in input order.
    pub fn featurize_many(&self, pairs: &[(&[Turn], &Turn)]) -> Result<Vec<FeatureVector>, FeatureError> {
        let mut out: Vec<FeatureVector> = pairs
            .par_iter()
            .map(|(h, r)| self.symbolic(h, r))
            .collect::<Result<_, _>>()?;
        for (chunk_idx, chunk) in pairs.chunks(self.config.lm_batch.max(1)).enumerate() {
            let concats: Vec<String> = chunk
                .iter()
                .map(|(h, r)| concat_history(h, r, &self.config.separator))
                .collect();
            let mut texts: Vec<&str> = Vec::with_capacity(2 * chunk.len());
            for ((_, r), c) in chunk.iter().zip(&concats) {
                texts.push(&r.text);
                texts.push(c);
            }
            let scores = self.scorer.score_batch(&texts)?;
            let base = chunk_idx * self.config.lm_batch.max(1);
            for (i, pair) in scores.chunks(2).enumerate() {
                out[base + i].lm_resp = pair[0].mean();
                out[base + i].lm_concat = pair[1].mean();
            }
        }
        Ok(out)
    }
}

/// [`Featurizer::featurize`] with the bundled extractor and default config.
pub fn featurize(
    graph: &ConceptGraph,
    scorer: &dyn LmScorer,
    history: &[Turn],
    response: &Turn,
) -> Result<FeatureVector, FeatureError> {
    Featurizer::new(graph, scorer).featurize(history, response)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::Triple;
    use crate::lm::{EchoScorer, NullScorer};

    fn doctor_graph() -> ConceptGraph {
        ConceptGraph::from_triples([
            Triple::parse("specialist", "TypeOf", "doctor"),
            Triple::parse("doctor", "LocateAt", "hospital"),
            Triple::parse("patient", "RelatedTo", "doctor"),
        ])
    }

    fn exchange() -> (Vec<Turn>, Turn) {
        (
            vec![Turn::new("speaker", "Hi, I want to find a doctor")],
            Turn::new(
                "friend",
                "What kind of doctor are you looking for? A general doctor or a specialist?",
            ),
        )
    }

    #[test]
    fn doctor_exchange_null_scorer() {
        let (h, r) = exchange();
        let fv = featurize(&doctor_graph(), &NullScorer, &h, &r).unwrap();
        assert_eq!(fv.one_hop, 1);
        // doctor -> m -> specialist needs an m linked to both; there is none.
        assert_eq!(fv.two_hop, 0);
        assert_eq!(fv.resp_len, 16);
        assert_eq!((fv.lm_resp, fv.lm_concat), (0.0, 0.0));
    }

    #[test]
    fn empty_graph() {
        let (h, r) = exchange();
        let fv = featurize(&ConceptGraph::default(), &NullScorer, &h, &r).unwrap();
        assert_eq!((fv.one_hop, fv.two_hop), (0, 0));
    }

    #[test]
    fn echo_scorer_mean_is_minus_one() {
        let (h, r) = exchange();
        let fv = featurize(&doctor_graph(), &EchoScorer, &h, &r).unwrap();
        assert_eq!(fv.lm_resp, -1.0);
        assert_eq!(fv.lm_concat, -1.0);
    }

    #[test]
    fn empty_response_is_an_error() {
        let r = Turn::new("friend", "   ");
        assert!(matches!(
            featurize(&doctor_graph(), &NullScorer, &[], &r),
            Err(FeatureError::EmptyResponse)
        ));
    }

    #[test]
    fn batched_matches_single() {
        let g = doctor_graph();
        let turns: Vec<Turn> = (0..7)
            .map(|i| Turn::new("s", format!("the doctor at the hospital number {i} saw a patient")))
            .collect();
        let pairs: Vec<(&[Turn], &Turn)> = (1..turns.len()).map(|i| (&turns[..i], &turns[i])).collect();
        let cfg = FeatureConfig {
            lm_batch: 2,
            ..Default::default()
        };
        let f = Featurizer::new(&g, &EchoScorer).with_config(cfg);
        let many = f.featurize_many(&pairs).unwrap();
        for (p, got) in pairs.iter().zip(&many) {
            assert_eq!(*got, f.featurize(p.0, p.1).unwrap());
        }
    }

    #[test]
    fn scope_last_uses_one_turn() {
        let g = doctor_graph();
        let h = vec![Turn::new("a", "I saw a specialist"), Turn::new("b", "nice weather")];
        let r = Turn::new("a", "the doctor agreed");
        let all = Featurizer::new(&g, &NullScorer).symbolic(&h, &r).unwrap();
        let last = Featurizer::new(&g, &NullScorer)
            .with_config(FeatureConfig {
                scope: HistoryScope::Last,
                ..Default::default()
            })
            .symbolic(&h, &r)
            .unwrap();
        assert_eq!((all.one_hop, last.one_hop), (1, 0));
    }
}
