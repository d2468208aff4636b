use rayon::prelude::*;

use crate::concepts::ConceptExtractor;
use crate::dialogue::Dialogue;
use crate::kg::ConceptGraph;
use crate::matching::{annotate_dialogue, DialogueMatchReport};

use super::stats::{CorpusStats, StatsAccumulator};

#[derive(Debug, Clone)]
pub struct FilterOptions {
    /// Worker threads; `None` uses one per logical core.
    pub jobs: Option<usize>,
    /// Dialogues annotated per parallel batch.
    pub chunk_size: usize,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            jobs: None,
            chunk_size: 1024,
        }
    }
}

/// Annotates a dialogue stream and hands every dialogue with its report to
/// `sink`, in input order. Only the statistics are accumulated, so the
/// stream may be larger than memory.
///
/// Dialogues are kept when `report.has_match` is true; the sink decides what
/// to do with each.
pub fn filter_corpus<I, E, F>(
    graph: &ConceptGraph,
    extractor: &ConceptExtractor,
    dialogues: I,
    options: &FilterOptions,
    mut sink: F,
) -> Result<CorpusStats, E>
where
    I: IntoIterator<Item = Result<Dialogue, E>>,
    F: FnMut(Dialogue, DialogueMatchReport) -> Result<(), E>,
{
    let pool = match options.jobs {
        Some(1) => None,
        jobs => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .expect("thread pool"),
        ),
    };
    let chunk_size = options.chunk_size.max(1);
    let mut stats = StatsAccumulator::default();
    let mut iter = dialogues.into_iter();
    let mut chunk: Vec<Dialogue> = Vec::with_capacity(chunk_size);
    loop {
        chunk.clear();
        for item in iter.by_ref() {
            chunk.push(item?);
            if chunk.len() == chunk_size {
                break;
            }
        }
        if chunk.is_empty() {
            break;
        }
        let reports: Vec<DialogueMatchReport> = match &pool {
            Some(pool) => pool.install(|| {
                chunk
                    .par_iter()
                    .map(|d| annotate_dialogue(graph, extractor, d))
                    .collect()
            }),
            None => chunk.iter().map(|d| annotate_dialogue(graph, extractor, d)).collect(),
        };
        for (d, r) in chunk.drain(..).zip(reports) {
            stats.add(&r);
            sink(d, r)?;
        }
    }
    Ok(stats.finish())
}

/// In-memory result of [`filter_dialogues`].
#[derive(Debug, Clone)]
pub struct FilterOutput {
    pub kept: Vec<Dialogue>,
    pub reports: Vec<DialogueMatchReport>,
    pub stats: CorpusStats,
}

/// Convenience wrapper around [`filter_corpus`] for in-memory corpora.
pub fn filter_dialogues(
    graph: &ConceptGraph,
    extractor: &ConceptExtractor,
    dialogues: Vec<Dialogue>,
    options: &FilterOptions,
) -> FilterOutput {
    let mut kept = Vec::new();
    let mut reports = Vec::new();
    let stats = filter_corpus::<_, std::convert::Infallible, _>(
        graph,
        extractor,
        dialogues.into_iter().map(Ok),
        options,
        |d, r| {
            if r.has_match {
                kept.push(d);
            }
            reports.push(r);
            Ok(())
        },
    )
    .unwrap_or_else(|e| match e {});
    FilterOutput { kept, reports, stats }
}
