//! The `csdial` command line.

pub mod args;
mod commands;
mod output;

use std::fmt;

pub use args::{Cli, Command};

/// A problem with the arguments themselves, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let jobs = cli.jobs;
    if let Some(n) = jobs {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::ExtractConcepts(a) => commands::extract_concepts(a),
        Command::Filter(a) => commands::filter(a, jobs),
        Command::SelectPrompts(a) => commands::select(a),
        Command::Featurize(a) => commands::featurize(a),
        Command::Train(a) => commands::train_model(a, cli.seed),
        Command::Score(a) => commands::score(a),
        Command::Evaluate(a) => commands::evaluate(a, cli.seed),
        Command::Stats(a) => commands::stats(a),
    }
}

/// Exit code for a failed run: 2 for usage errors, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}

/// The error and its causes on one line, skipping causes whose text the
/// message already includes.
pub fn error_message(err: &anyhow::Error) -> String {
    let mut msg = err.to_string();
    for cause in err.chain().skip(1) {
        let c = cause.to_string();
        if !msg.contains(&c) {
            msg.push_str(": ");
            msg.push_str(&c);
        }
    }
    msg
}
