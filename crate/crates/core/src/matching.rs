//! One-hop and two-hop triple matching between concept sets.
//!
//! A one-hop match is a graph triple whose endpoints fall on opposite sides:
//! one in the earlier set, the other in the later set. Direction records
//! which side the head came from but never filters.
//!
//! A two-hop connection is an ordered pair of distinct triples `(t1, t2)`
//! joined through an intermediate concept `m`: `t1` links `a` and `m`, `t2`
//! links `m` and `b`, with `a` earlier, `b` later, and `a`, `b`, `m` pairwise
//! distinct. Each triple may be read in either orientation.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::concepts::{ConceptExtractor, ConceptSet};
use crate::dialogue::Dialogue;
use crate::kg::{Concept, ConceptGraph, ConceptId, Role, Triple, TripleId};

/// Default per-pair bound on two-hop enumeration.
pub const DEFAULT_TWO_HOP_CAP: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// The earlier concept is the triple's head.
    Forward,
    /// The earlier concept is the triple's tail.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub triple: Triple,
    pub source: Concept,
    pub target: Concept,
    pub direction: Direction,
}

/// Matches between two concept sets, in canonical triple order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchSet {
    matches: Vec<Match>,
}

impl MatchSet {
    pub fn matches(&self) -> &[Match] {
        &self.matches
    }

    pub fn one_hop_count(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Match> {
        self.matches.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TwoHopCount {
    pub count: u64,
    /// True when the exact count exceeds the cap; `count` then equals the cap.
    pub capped: bool,
}

/// Graph ids of the members of `set` that occur in the graph.
fn ids_in(graph: &ConceptGraph, set: &ConceptSet) -> Vec<ConceptId> {
    set.iter().filter_map(|c| graph.concept_id(c.as_str())).collect()
}

fn degree_sum(graph: &ConceptGraph, ids: &[ConceptId]) -> usize {
    ids.iter().map(|&c| graph.adjacency(c).len()).sum()
}

/// All triples linking a concept of `earlier` to a different concept of
/// `later`.
pub fn match_pair(graph: &ConceptGraph, earlier: &ConceptSet, later: &ConceptSet) -> MatchSet {
    let e = ids_in(graph, earlier);
    let l = ids_in(graph, later);
    if e.is_empty() || l.is_empty() {
        return MatchSet::default();
    }
    let mut found: Vec<(TripleId, Direction)> = Vec::new();
    // Scan adjacency of whichever side is cheaper; probe the other side.
    if degree_sum(graph, &e) <= degree_sum(graph, &l) {
        let probe: HashSet<ConceptId> = l.iter().copied().collect();
        for &a in &e {
            for &(t, role) in graph.adjacency(a) {
                if probe.contains(&graph.other_end(t, a)) {
                    let dir = if role == Role::Subject {
                        Direction::Forward
                    } else {
                        Direction::Backward
                    };
                    found.push((t, dir));
                }
            }
        }
    } else {
        let probe: HashSet<ConceptId> = e.iter().copied().collect();
        for &b in &l {
            for &(t, role) in graph.adjacency(b) {
                if probe.contains(&graph.other_end(t, b)) {
                    // The earlier concept is the head iff `b` is the tail.
                    let dir = if role == Role::Object {
                        Direction::Forward
                    } else {
                        Direction::Backward
                    };
                    found.push((t, dir));
                }
            }
        }
    }
    found.sort_unstable();
    let matches = found
        .into_iter()
        .map(|(t, direction)| {
            let r = graph.triple_ref(t);
            let (source, target) = match direction {
                Direction::Forward => (r.head().clone(), r.tail().clone()),
                Direction::Backward => (r.tail().clone(), r.head().clone()),
            };
            Match {
                triple: r.to_triple(),
                source,
                target,
                direction,
            }
        })
        .collect();
    MatchSet { matches }
}

/// Number of two-hop connections from `earlier` to `later`, stopping once
/// the count exceeds `cap`.
///
/// # Panics
/// If `cap` is zero.
pub fn two_hop_count(graph: &ConceptGraph, earlier: &ConceptSet, later: &ConceptSet, cap: u64) -> TwoHopCount {
    assert!(cap >= 1, "two-hop cap must be positive");
    let e = ids_in(graph, earlier);
    let l = ids_in(graph, later);
    // The count is symmetric in the two sets, so build the multiplicity maps
    // on the side that makes the inner scans cheaper.
    let (outer, inner) = if e.len() * degree_sum(graph, &l) <= l.len() * degree_sum(graph, &e) {
        (e, l)
    } else {
        (l, e)
    };
    let mut total: u64 = 0;
    let mut mult: HashMap<ConceptId, u64> = HashMap::new();
    for &a in &outer {
        mult.clear();
        for &(t, _) in graph.adjacency(a) {
            *mult.entry(graph.other_end(t, a)).or_insert(0) += 1;
        }
        for &b in &inner {
            if b == a {
                continue;
            }
            for &(t, _) in graph.adjacency(b) {
                let m = graph.other_end(t, b);
                if m == a {
                    continue;
                }
                if let Some(&k) = mult.get(&m) {
                    total += k;
                    if total > cap {
                        return TwoHopCount {
                            count: cap,
                            capped: true,
                        };
                    }
                }
            }
        }
    }
    TwoHopCount {
        count: total,
        capped: false,
    }
}

/// One adjacent turn pair of a dialogue.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    /// Index of the earlier turn.
    pub index: usize,
    pub earlier: ConceptSet,
    pub later: ConceptSet,
    pub matches: MatchSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueMatchReport {
    pub dialogue_id: String,
    pub pairs: Vec<PairReport>,
    pub has_match: bool,
}

impl DialogueMatchReport {
    pub fn total_matches(&self) -> usize {
        self.pairs.iter().map(|p| p.matches.one_hop_count()).sum()
    }

    /// Matched triples per relation name.
    pub fn relation_counts(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for m in self.pairs.iter().flat_map(|p| p.matches.iter()) {
            *out.entry(m.triple.relation.as_str().to_owned()).or_insert(0) += 1;
        }
        out
    }

    pub fn to_record(&self) -> ReportRecord {
        ReportRecord {
            dialogue_id: self.dialogue_id.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|p| PairRecord {
                    index: p.index,
                    matches: p
                        .matches
                        .iter()
                        .map(|m| MatchRecord {
                            head: m.triple.head.as_str().to_owned(),
                            relation: m.triple.relation.as_str().to_owned(),
                            tail: m.triple.tail.as_str().to_owned(),
                            source: m.source.as_str().to_owned(),
                            target: m.target.as_str().to_owned(),
                            direction: m.direction,
                        })
                        .collect(),
                    one_hop_count: p.matches.one_hop_count(),
                })
                .collect(),
            has_match: self.has_match,
        }
    }
}

/// Concept sets of every turn and matches of every adjacent pair.
pub fn annotate_dialogue(
    graph: &ConceptGraph,
    extractor: &ConceptExtractor,
    dialogue: &Dialogue,
) -> DialogueMatchReport {
    let sets: Vec<ConceptSet> = dialogue.turns.iter().map(|t| extractor.extract(&t.text)).collect();
    let pairs: Vec<PairReport> = sets
        .windows(2)
        .enumerate()
        .map(|(index, w)| PairReport {
            index,
            matches: match_pair(graph, &w[0], &w[1]),
            earlier: w[0].clone(),
            later: w[1].clone(),
        })
        .collect();
    let has_match = pairs.iter().any(|p| p.matches.one_hop_count() >= 1);
    DialogueMatchReport {
        dialogue_id: dialogue.id.clone(),
        pairs,
        has_match,
    }
}

/// Serialized form of a [`DialogueMatchReport`], one JSON line per dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub dialogue_id: String,
    pub pairs: Vec<PairRecord>,
    pub has_match: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub index: usize,
    pub matches: Vec<MatchRecord>,
    pub one_hop_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub head: String,
    pub relation: String,
    pub tail: String,
    pub source: String,
    pub target: String,
    pub direction: Direction,
}
