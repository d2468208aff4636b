//! Commonsense-focused dialogue tooling.
//!
//! The crate has two halves that share one knowledge-graph index:
//!
//! * **Filtering.** Each dialogue turn is reduced to a set of candidate
//!   concepts ([`concepts`]). Adjacent turns are linked through
//!   ConceptNet-style triples ([`kg`], [`matching`]). A dialogue is kept when
//!   at least one adjacent pair is linked ([`corpus`]).
//! * **Metric.** A history/response pair becomes a feature vector. The
//!   symbolic part is one-hop and two-hop triple counts plus response length.
//!   The neural part is language-model log-probabilities obtained through
//!   [`lm`]. An MLP regressor is trained against human plausibility scores
//!   and evaluated with Spearman correlation ([`metric`]).
//!
//! ```
//! use csdial::concepts::ConceptExtractor;
//!
//! let extractor = ConceptExtractor::bundled();
//! let concepts = extractor.extract("Hi, I want to find a doctor");
//! assert_eq!(concepts.to_strings(), ["doctor", "find", "want"]);
//! ```

pub mod concepts;
pub mod corpus;
pub mod dialogue;
pub mod kg;
pub mod lm;
pub mod matching;
pub mod metric;
pub mod synthetic;

pub use concepts::{ConceptExtractor, ConceptSet, PosTag, Token};
pub use corpus::{CorpusFormat, CorpusStats};
pub use dialogue::{Dialogue, Turn};
pub use kg::{Concept, ConceptGraph, IngestConfig, IngestSummary, Relation, Role, Triple};
pub use lm::{LmScore, LmScorer};
pub use matching::{DialogueMatchReport, Direction, Match, MatchSet, TwoHopCount};
pub use metric::{FeatureMask, FeatureVector, RegressorModel};
