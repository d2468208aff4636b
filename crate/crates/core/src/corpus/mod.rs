//! Corpus reading and writing, commonsense filtering, statistics, and
//! prompt selection.

mod filter;
mod io;
mod prompts;
mod stats;

pub use filter::{filter_corpus, filter_dialogues, FilterOptions, FilterOutput};
pub use io::{read_corpus, read_corpus_from, CorpusError, CorpusFormat, CorpusReader, CorpusWriter, PARTNER_LABEL};
pub use prompts::{
    has_mid_punctuation, read_contexts, select_prompt, select_prompts, word_count, NameDetector, PromptContext,
    PromptSummary, RejectReason, MIN_WORDS,
};
pub use stats::{CorpusStats, MatchSummary, StatsAccumulator};
