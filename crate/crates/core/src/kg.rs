//! In-memory commonsense triple store.
//!
//! [`ConceptGraph`] is built once from an assertion dump and then only read.
//! Concepts and relations are interned. Triples are kept in lexical order,
//! and every concept owns a compact adjacency list of the triples it
//! participates in, tagged with the [`Role`] it plays.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single-token, lowercase concept lemma.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Concept(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConceptError {
    #[error("concept is empty")]
    Empty,
    #[error("concept {0:?} is a multiword phrase")]
    Multiword(String),
    #[error("concept {0:?} contains '/'")]
    Slash(String),
}

impl Concept {
    /// Lowercases `raw` and checks the single-token invariant.
    pub fn new(raw: &str) -> Result<Self, ConceptError> {
        if raw.is_empty() {
            return Err(ConceptError::Empty);
        }
        if raw.contains(|c: char| c == '_' || c.is_whitespace()) {
            return Err(ConceptError::Multiword(raw.to_owned()));
        }
        if raw.contains('/') {
            return Err(ConceptError::Slash(raw.to_owned()));
        }
        Ok(Concept(raw.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Concept {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Concept {
    type Error = ConceptError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Concept::new(&value)
    }
}

impl From<Concept> for String {
    fn from(c: Concept) -> String {
        c.0
    }
}

/// Relation label with any `/r/` URI prefix removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Relation(String);

impl Relation {
    /// Returns `None` for an empty label.
    pub fn new(raw: &str) -> Option<Self> {
        let name = raw.strip_prefix("/r/").unwrap_or(raw).trim_end_matches('/');
        if name.is_empty() {
            None
        } else {
            Some(Relation(name.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An owned `(head, relation, tail)` assertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub head: Concept,
    pub relation: Relation,
    pub tail: Concept,
    pub weight: f64,
}

impl Triple {
    pub fn new(head: Concept, relation: Relation, tail: Concept) -> Self {
        Triple {
            head,
            relation,
            tail,
            weight: 1.0,
        }
    }

    /// Convenience constructor for plain lemmas. Panics on invalid input,
    /// so keep it to tests and fixtures.
    pub fn parse(head: &str, relation: &str, tail: &str) -> Self {
        Triple::new(
            Concept::new(head).expect("valid head concept"),
            Relation::new(relation).expect("valid relation"),
            Concept::new(tail).expect("valid tail concept"),
        )
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.head, self.relation, self.tail)
    }
}

/// Which slot of a triple a concept occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Object,
}

pub(crate) type ConceptId = u32;
pub(crate) type TripleId = u32;

#[derive(Debug, Clone, PartialEq)]
struct Edge {
    head: ConceptId,
    relation: u32,
    tail: ConceptId,
    weight: f64,
}

/// Immutable bidirectional triple index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConceptGraph {
    concepts: Vec<Concept>,
    concept_ids: HashMap<Concept, ConceptId>,
    relations: Vec<Relation>,
    edges: Vec<Edge>,
    // CSR adjacency: entries of concept `c` live in adj[adj_offsets[c]..adj_offsets[c + 1]].
    adj_offsets: Vec<usize>,
    adj: Vec<(TripleId, Role)>,
}

/// Borrowed view of one triple stored in a [`ConceptGraph`].
#[derive(Clone, Copy)]
pub struct TripleRef<'g> {
    graph: &'g ConceptGraph,
    id: TripleId,
}

impl<'g> TripleRef<'g> {
    fn edge(&self) -> &'g Edge {
        &self.graph.edges[self.id as usize]
    }

    pub fn head(&self) -> &'g Concept {
        &self.graph.concepts[self.edge().head as usize]
    }

    pub fn relation(&self) -> &'g Relation {
        &self.graph.relations[self.edge().relation as usize]
    }

    pub fn tail(&self) -> &'g Concept {
        &self.graph.concepts[self.edge().tail as usize]
    }

    pub fn weight(&self) -> f64 {
        self.edge().weight
    }

    /// Position of the triple in the graph's canonical order.
    pub fn index(&self) -> usize {
        self.id as usize
    }

    pub fn to_triple(&self) -> Triple {
        Triple {
            head: self.head().clone(),
            relation: self.relation().clone(),
            tail: self.tail().clone(),
            weight: self.weight(),
        }
    }
}

impl PartialEq for TripleRef<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.graph, other.graph) && self.id == other.id
    }
}

impl Eq for TripleRef<'_> {}

impl fmt::Debug for TripleRef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TripleRef({} {} {})", self.head(), self.relation(), self.tail())
    }
}

impl fmt::Display for TripleRef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.head(), self.relation(), self.tail())
    }
}

impl ConceptGraph {
    /// Builds a graph from owned triples: self-loops are dropped and duplicate
    /// `(head, relation, tail)` keys keep their maximum weight.
    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I) -> Self {
        let mut builder = GraphBuilder::default();
        for t in triples {
            builder.insert(t.head.as_str(), t.relation.as_str(), t.tail.as_str(), t.weight);
        }
        builder.finish()
    }

    /// Number of distinct triples.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn contains_concept(&self, concept: &str) -> bool {
        self.concept_ids.contains_key(concept)
    }

    /// All triples in canonical (lexical) order.
    pub fn triples(&self) -> impl ExactSizeIterator<Item = TripleRef<'_>> + '_ {
        (0..self.edges.len() as TripleId).map(move |id| TripleRef { graph: self, id })
    }

    pub fn triple(&self, index: usize) -> Option<TripleRef<'_>> {
        (index < self.edges.len()).then(|| TripleRef {
            graph: self,
            id: index as TripleId,
        })
    }

    /// Every triple mentioning `concept`, with the role it plays there.
    /// Unknown concepts yield nothing.
    pub fn neighbors<'g>(&'g self, concept: &str) -> impl Iterator<Item = (TripleRef<'g>, Role)> + 'g {
        let entries: &[(TripleId, Role)] = match self.concept_ids.get(concept) {
            Some(&id) => self.adjacency(id),
            None => &[],
        };
        entries
            .iter()
            .map(move |&(id, role)| (TripleRef { graph: self, id }, role))
    }

    /// Writes `head<TAB>relation<TAB>tail<TAB>weight` lines in triple order,
    /// the simplified form [`ingest_assertions`] reads back.
    pub fn write_tsv<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        for t in self.triples() {
            writeln!(out, "{}\t{}\t{}\t{}", t.head(), t.relation(), t.tail(), t.weight())?;
        }
        Ok(())
    }

    /// Triples linking `a` and `b` in either orientation; empty when `a == b`.
    pub fn connecting_triples(&self, a: &str, b: &str) -> Vec<TripleRef<'_>> {
        let (Some(&ia), Some(&ib)) = (self.concept_ids.get(a), self.concept_ids.get(b)) else {
            return Vec::new();
        };
        if ia == ib {
            return Vec::new();
        }
        // Walk the shorter adjacency list.
        let (from, to) = if self.degree(ia) <= self.degree(ib) {
            (ia, ib)
        } else {
            (ib, ia)
        };
        self.adjacency(from)
            .iter()
            .filter(|&&(t, _)| self.other_end(t, from) == to)
            .map(|&(id, _)| TripleRef { graph: self, id })
            .collect()
    }

    /// Looks up a triple by its key.
    pub fn find(&self, head: &str, relation: &str, tail: &str) -> Option<TripleRef<'_>> {
        let &h = self.concept_ids.get(head)?;
        self.adjacency(h)
            .iter()
            .map(|&(id, _)| TripleRef { graph: self, id })
            .find(|t| t.head().as_str() == head && t.relation().as_str() == relation && t.tail().as_str() == tail)
    }

    /// True when every triple key of `self` also exists in `other`.
    pub fn is_subgraph_of(&self, other: &ConceptGraph) -> bool {
        self.triples().all(|t| {
            other
                .find(t.head().as_str(), t.relation().as_str(), t.tail().as_str())
                .is_some()
        })
    }

    pub(crate) fn concept_id(&self, concept: &str) -> Option<ConceptId> {
        self.concept_ids.get(concept).copied()
    }

    pub(crate) fn adjacency(&self, id: ConceptId) -> &[(TripleId, Role)] {
        let i = id as usize;
        &self.adj[self.adj_offsets[i]..self.adj_offsets[i + 1]]
    }

    fn degree(&self, id: ConceptId) -> usize {
        let i = id as usize;
        self.adj_offsets[i + 1] - self.adj_offsets[i]
    }

    /// The endpoint of triple `t` that is not `from`.
    pub(crate) fn other_end(&self, t: TripleId, from: ConceptId) -> ConceptId {
        let e = &self.edges[t as usize];
        if e.head == from {
            e.tail
        } else {
            e.head
        }
    }

    pub(crate) fn triple_ref(&self, id: TripleId) -> TripleRef<'_> {
        TripleRef { graph: self, id }
    }
}

/// Accumulates interned triples during ingest.
#[derive(Default)]
struct GraphBuilder {
    concept_ids: HashMap<String, u32>,
    concept_names: Vec<String>,
    relation_ids: HashMap<String, u32>,
    relation_names: Vec<String>,
    edges: HashMap<(u32, u32, u32), f64>,
}

enum Inserted {
    New,
    Duplicate,
    SelfLoop,
}

impl GraphBuilder {
    fn intern(ids: &mut HashMap<String, u32>, names: &mut Vec<String>, s: &str) -> u32 {
        if let Some(&id) = ids.get(s) {
            return id;
        }
        let id = names.len() as u32;
        names.push(s.to_owned());
        ids.insert(s.to_owned(), id);
        id
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    fn insert(&mut self, head: &str, relation: &str, tail: &str, weight: f64) -> Inserted {
        if head == tail {
            return Inserted::SelfLoop;
        }
        let h = Self::intern(&mut self.concept_ids, &mut self.concept_names, head);
        let t = Self::intern(&mut self.concept_ids, &mut self.concept_names, tail);
        let r = Self::intern(&mut self.relation_ids, &mut self.relation_names, relation);
        match self.edges.entry((h, r, t)) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                if weight > *e.get() {
                    e.insert(weight);
                }
                Inserted::Duplicate
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(weight);
                Inserted::New
            }
        }
    }

    fn finish(self) -> ConceptGraph {
        // Remap interned ids to lexical order so the result does not depend
        // on input order, then keep only concepts that are actually used.
        let mut used = vec![false; self.concept_names.len()];
        for &(h, _, t) in self.edges.keys() {
            used[h as usize] = true;
            used[t as usize] = true;
        }
        let mut concept_order: Vec<u32> = (0..self.concept_names.len() as u32)
            .filter(|&i| used[i as usize])
            .collect();
        concept_order.sort_by(|&a, &b| self.concept_names[a as usize].cmp(&self.concept_names[b as usize]));
        let mut concept_remap = vec![u32::MAX; self.concept_names.len()];
        for (new, &old) in concept_order.iter().enumerate() {
            concept_remap[old as usize] = new as u32;
        }

        let mut relation_order: Vec<u32> = (0..self.relation_names.len() as u32).collect();
        relation_order.sort_by(|&a, &b| self.relation_names[a as usize].cmp(&self.relation_names[b as usize]));
        let mut relation_remap = vec![0u32; self.relation_names.len()];
        for (new, &old) in relation_order.iter().enumerate() {
            relation_remap[old as usize] = new as u32;
        }

        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|(&(h, r, t), &weight)| Edge {
                head: concept_remap[h as usize],
                relation: relation_remap[r as usize],
                tail: concept_remap[t as usize],
                weight,
            })
            .collect();
        edges.sort_by_key(|e| (e.head, e.relation, e.tail));

        let concepts: Vec<Concept> = concept_order
            .iter()
            .map(|&old| Concept(self.concept_names[old as usize].clone()))
            .collect();
        let relations: Vec<Relation> = relation_order
            .iter()
            .map(|&old| Relation(self.relation_names[old as usize].clone()))
            .collect();

        let mut degree = vec![0usize; concepts.len()];
        for e in &edges {
            degree[e.head as usize] += 1;
            degree[e.tail as usize] += 1;
        }
        let mut adj_offsets = Vec::with_capacity(concepts.len() + 1);
        adj_offsets.push(0);
        for d in &degree {
            adj_offsets.push(adj_offsets.last().unwrap() + d);
        }
        let mut cursor = adj_offsets.clone();
        let mut adj = vec![(0, Role::Subject); adj_offsets[concepts.len()]];
        for (i, e) in edges.iter().enumerate() {
            adj[cursor[e.head as usize]] = (i as TripleId, Role::Subject);
            cursor[e.head as usize] += 1;
            adj[cursor[e.tail as usize]] = (i as TripleId, Role::Object);
            cursor[e.tail as usize] += 1;
        }

        let concept_ids = concepts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as ConceptId))
            .collect();

        ConceptGraph {
            concepts,
            concept_ids,
            relations,
            edges,
            adj_offsets,
            adj,
        }
    }
}

/// Ingest options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    /// ConceptNet language code accepted from `/c/<lang>/...` URIs.
    pub language: String,
    /// Stop reading once this many distinct triples are kept.
    pub max_triples: Option<usize>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            language: "en".to_owned(),
            max_triples: None,
        }
    }
}

/// Why an assertion line did not become a new triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Malformed,
    Language,
    Multiword,
    SelfLoop,
    Duplicate,
}

/// Counts produced alongside an ingested graph. Comment and blank lines are
/// not counted in `lines_read`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub lines_read: u64,
    pub kept: u64,
    pub concepts: u64,
    pub dropped: BTreeMap<DropReason, u64>,
    pub truncated: bool,
}

impl IngestSummary {
    pub fn dropped(&self, reason: DropReason) -> u64 {
        self.dropped.get(&reason).copied().unwrap_or(0)
    }

    fn drop_line(&mut self, reason: DropReason) {
        *self.dropped.entry(reason).or_default() += 1;
    }
}

#[derive(Debug, Error)]
pub enum KgError {
    #[error("cannot read assertions from {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("invalid ingest config: {0}")]
    Config(String),
}

/// Reads assertions from a file; see [`ingest_assertions`].
pub fn ingest_path(path: &Path, config: &IngestConfig) -> Result<(ConceptGraph, IngestSummary), KgError> {
    let file = File::open(path).map_err(|source| KgError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_assertions(BufReader::new(file), config).map_err(|e| match e {
        KgError::Io { source, .. } => KgError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

/// Parses a line-oriented assertion stream.
///
/// Two formats are accepted per line and may be mixed:
/// ConceptNet 5 CSV dumps (`edge-uri, relation-uri, start-uri, end-uri,
/// json-metadata`, tab separated) and a simplified
/// `head<TAB>relation<TAB>tail[<TAB>weight]` form. Lines starting with `#`
/// are comments. Unparseable lines are counted under
/// [`DropReason::Malformed`] and skipped.
pub fn ingest_assertions<R: BufRead>(
    mut reader: R,
    config: &IngestConfig,
) -> Result<(ConceptGraph, IngestSummary), KgError> {
    if config.language.is_empty() {
        return Err(KgError::Config("language tag must not be empty".into()));
    }
    let mut builder = GraphBuilder::default();
    let mut summary = IngestSummary::default();
    let mut buf = Vec::new();
    loop {
        if config.max_triples.is_some_and(|cap| builder.len() >= cap) {
            summary.truncated = true;
            break;
        }
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(|source| KgError::Io {
            path: "<stream>".into(),
            source,
        })?;
        if n == 0 {
            break;
        }
        let Ok(line) = std::str::from_utf8(&buf) else {
            summary.lines_read += 1;
            summary.drop_line(DropReason::Malformed);
            continue;
        };
        let line = line.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        summary.lines_read += 1;
        match parse_line(line, &config.language) {
            Ok((head, relation, tail, weight)) => {
                match builder.insert(head.as_str(), relation.as_str(), tail.as_str(), weight) {
                    Inserted::New => {}
                    Inserted::Duplicate => summary.drop_line(DropReason::Duplicate),
                    Inserted::SelfLoop => summary.drop_line(DropReason::SelfLoop),
                }
            }
            Err(reason) => summary.drop_line(reason),
        }
    }
    let graph = builder.finish();
    summary.kept = graph.len() as u64;
    summary.concepts = graph.concept_count() as u64;
    log::debug!(
        "ingested {} triples over {} concepts from {} lines",
        summary.kept,
        summary.concepts,
        summary.lines_read
    );
    Ok((graph, summary))
}

fn parse_line(line: &str, language: &str) -> Result<(Concept, Relation, Concept, f64), DropReason> {
    let fields: Vec<&str> = line.split('\t').collect();
    let (relation, head, tail, weight) = if fields.len() == 5 && fields[0].starts_with("/a/") {
        let meta: serde_json::Value = serde_json::from_str(fields[4]).map_err(|_| DropReason::Malformed)?;
        let weight = match meta.get("weight") {
            None => 1.0,
            Some(w) => w.as_f64().ok_or(DropReason::Malformed)?,
        };
        (fields[1], fields[2], fields[3], weight)
    } else if fields.len() == 3 || fields.len() == 4 {
        let weight = match fields.get(3) {
            Some(w) => w.trim().parse::<f64>().map_err(|_| DropReason::Malformed)?,
            None => 1.0,
        };
        (fields[1], fields[0], fields[2], weight)
    } else {
        return Err(DropReason::Malformed);
    };
    if !weight.is_finite() || weight < 0.0 {
        return Err(DropReason::Malformed);
    }
    let relation = Relation::new(relation.trim()).ok_or(DropReason::Malformed)?;
    let head = parse_term(head.trim(), language)?;
    let tail = parse_term(tail.trim(), language)?;
    if head == tail {
        return Err(DropReason::SelfLoop);
    }
    Ok((head, relation, tail, weight))
}

/// `/c/en/dog/n/...` or a plain lemma.
fn parse_term(raw: &str, language: &str) -> Result<Concept, DropReason> {
    let term = if let Some(rest) = raw.strip_prefix("/c/") {
        let mut parts = rest.split('/');
        let lang = parts.next().unwrap_or("");
        if lang != language {
            return Err(DropReason::Language);
        }
        parts.next().unwrap_or("")
    } else {
        raw
    };
    match Concept::new(term) {
        Ok(c) => Ok(c),
        Err(ConceptError::Multiword(_)) => Err(DropReason::Multiword),
        Err(_) => Err(DropReason::Malformed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOCTOR_TSV: &str = "specialist\tTypeOf\tdoctor\ndoctor\tLocateAt\thospital\npatient\tRelatedTo\tdoctor\n";

    fn ingest_str(s: &str) -> (ConceptGraph, IngestSummary) {
        ingest_assertions(s.as_bytes(), &IngestConfig::default()).unwrap()
    }

    #[test]
    fn doctor_fixture() {
        let (g, summary) = ingest_str(DOCTOR_TSV);
        assert_eq!(g.len(), 3);
        assert_eq!(g.concept_count(), 4);
        assert_eq!(summary.kept, 3);
        assert_eq!(summary.lines_read, 3);
    }

    #[test]
    fn empty_stream() {
        let (g, summary) = ingest_str("");
        assert!(g.is_empty());
        assert_eq!(g.concept_count(), 0);
        assert_eq!(summary.kept, 0);
    }

    #[test]
    fn multiword_and_self_loops_are_dropped() {
        let (g, s) = ingest_str("ice_cream\tIsA\tdessert\n");
        assert!(g.is_empty());
        assert_eq!(s.dropped(DropReason::Multiword), 1);

        let (g, s) = ingest_str("doctor\tRelatedTo\tdoctor\n");
        assert!(g.is_empty());
        assert_eq!(s.dropped(DropReason::SelfLoop), 1);
    }

    #[test]
    fn conceptnet_rows() {
        let dump = concat!(
            "/a/[/r/IsA/,/c/en/dog/n/,/c/en/animal/]\t/r/IsA\t/c/en/dog/n\t/c/en/animal\t{\"dataset\": \"/d/wordnet\", \"weight\": 2.5}\n",
            "/a/[/r/IsA/,/c/fr/chien/,/c/en/dog/]\t/r/IsA\t/c/fr/chien\t/c/en/dog\t{\"weight\": 1.0}\n",
            "/a/[/r/AtLocation/,/c/en/Ice_Cream/,/c/en/fridge/]\t/r/AtLocation\t/c/en/ice_cream\t/c/en/fridge\t{}\n",
            "/a/[/r/RelatedTo/,/c/en/Cat/,/c/en/pet/]\t/r/RelatedTo\t/c/en/Cat\t/c/en/pet\t{}\n",
            "/a/[/r/RelatedTo/,/c/en/cat/,/c/en/pet/]\t/r/RelatedTo\t/c/en/cat\t/c/en/pet\tnot json\n",
            "# a comment\n",
            "\n",
            "only\ttwo\n",
        );
        let (g, s) = ingest_str(dump);
        assert_eq!(g.len(), 2);
        let dog = g.find("dog", "IsA", "animal").unwrap();
        assert_eq!(dog.weight(), 2.5);
        let cat = g.find("cat", "RelatedTo", "pet").unwrap();
        assert_eq!(cat.weight(), 1.0);
        assert_eq!(s.lines_read, 6);
        assert_eq!(s.dropped(DropReason::Language), 1);
        assert_eq!(s.dropped(DropReason::Multiword), 1);
        assert_eq!(s.dropped(DropReason::Malformed), 2);
    }

    #[test]
    fn duplicates_keep_max_weight_regardless_of_order() {
        let (a, s) = ingest_str("a\tr\tb\t0.5\na\tr\tb\t2\n");
        let (b, _) = ingest_str("a\tr\tb\t2\na\tr\tb\t0.5\n");
        assert_eq!(a, b);
        assert_eq!(a.find("a", "r", "b").unwrap().weight(), 2.0);
        assert_eq!(s.dropped(DropReason::Duplicate), 1);
    }

    #[test]
    fn bad_weights_are_malformed() {
        let (g, s) = ingest_str("a\tr\tb\tx\na\tr\tc\t-1\na\tr\td\tNaN\n");
        assert!(g.is_empty());
        assert_eq!(s.dropped(DropReason::Malformed), 3);
    }

    #[test]
    fn invalid_utf8_line_is_skipped() {
        let mut bytes = b"a\tr\tb\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xfe, b'\t', b'r', b'\t', b'c', b'\n']);
        let (g, s) = ingest_assertions(&bytes[..], &IngestConfig::default()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(s.dropped(DropReason::Malformed), 1);
    }

    #[test]
    fn max_triples_truncates() {
        let cfg = IngestConfig {
            max_triples: Some(2),
            ..IngestConfig::default()
        };
        let (g, s) = ingest_assertions(DOCTOR_TSV.as_bytes(), &cfg).unwrap();
        assert_eq!(g.len(), 2);
        assert!(s.truncated);
    }

    #[test]
    fn neighbors_and_connecting() {
        let (g, _) = ingest_str(DOCTOR_TSV);
        let mut n: Vec<(String, Role)> = g.neighbors("doctor").map(|(t, r)| (t.to_string(), r)).collect();
        n.sort();
        assert_eq!(
            n,
            vec![
                ("doctor LocateAt hospital".to_string(), Role::Subject),
                ("patient RelatedTo doctor".to_string(), Role::Object),
                ("specialist TypeOf doctor".to_string(), Role::Object),
            ]
        );
        assert_eq!(g.neighbors("zebra").count(), 0);
        let c: Vec<String> = g
            .connecting_triples("doctor", "specialist")
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(c, ["specialist TypeOf doctor"]);
        assert!(g.connecting_triples("doctor", "doctor").is_empty());
        assert!(g.connecting_triples("doctor", "zebra").is_empty());
    }

    #[test]
    fn concept_normalization() {
        assert_eq!(Concept::new("Doctor").unwrap().as_str(), "doctor");
        assert!(matches!(Concept::new("ice cream"), Err(ConceptError::Multiword(_))));
        assert!(matches!(Concept::new(""), Err(ConceptError::Empty)));
        assert!(matches!(Concept::new("a/b"), Err(ConceptError::Slash(_))));
        assert_eq!(Relation::new("/r/IsA").unwrap().as_str(), "IsA");
        assert!(Relation::new("/r/").is_none());
    }

    #[test]
    fn unreadable_path() {
        let err = ingest_path(Path::new("/nonexistent/kg.tsv"), &IngestConfig::default()).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/kg.tsv"));
    }
}
