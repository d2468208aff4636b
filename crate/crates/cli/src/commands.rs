use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use csdial::corpus::{
    filter_corpus, read_contexts, select_prompts, CorpusReader, CorpusStats, CorpusWriter, FilterOptions, NameDetector,
    StatsAccumulator,
};
use csdial::kg::{ingest_path, IngestConfig};
use csdial::lm::{NullScorer, ScorerEndpoint};
use csdial::matching::ReportRecord;
use csdial::metric::{
    average_annotations, cross_validate_features, featurize_dataset, read_annotations_path, train, AnnotatedExample,
    FeatureConfig, Featurizer, Hyper,
};
use csdial::{
    ConceptExtractor, ConceptGraph, CorpusFormat, FeatureMask, FeatureVector, LmScorer, RegressorModel, Turn,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{self, AtomicFile};
use crate::UsageError;

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// Rejects an output path that is also an input or another output.
fn distinct_outputs(inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
    for (i, out) in outputs.iter().enumerate() {
        if inputs.contains(out) || outputs[..i].contains(out) {
            return Err(usage(format!("{} is used for more than one file", out.display())));
        }
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load_graph(args: &GraphArgs) -> Result<ConceptGraph> {
    let config = IngestConfig {
        language: args.language.clone(),
        max_triples: None,
    };
    let (graph, summary) = ingest_path(&args.graph, &config)?;
    log::info!(
        "graph {}: {} triples over {} concepts ({} lines read)",
        args.graph.display(),
        summary.kept,
        summary.concepts,
        summary.lines_read
    );
    Ok(graph)
}

pub fn ingest(a: &IngestArgs) -> Result<()> {
    let outputs: Vec<&Path> = a.summary.iter().chain(&a.graph_out).map(PathBuf::as_path).collect();
    distinct_outputs(&[&a.input], &outputs)?;
    if a.language.is_empty() {
        return Err(usage("--language must not be empty"));
    }
    let config = IngestConfig {
        language: a.language.clone(),
        max_triples: a.max_triples,
    };
    let (graph, summary) = ingest_path(&a.input, &config)?;
    let mut files = Vec::new();
    if let Some(p) = &a.summary {
        let mut f = AtomicFile::create(p)?;
        serde_json::to_writer_pretty(&mut f, &summary)?;
        writeln!(f)?;
        files.push(f);
    }
    if let Some(p) = &a.graph_out {
        let mut f = AtomicFile::create(p)?;
        graph.write_tsv(&mut f)?;
        files.push(f);
    }
    output::commit(files)?;
    print_json(&summary)
}

pub fn extract_concepts(a: &ExtractArgs) -> Result<()> {
    let texts: Vec<String> = if !a.texts.is_empty() {
        a.texts.clone()
    } else {
        let reader: Box<dyn BufRead> = match &a.input {
            Some(p) => Box::new(BufReader::new(
                File::open(p).with_context(|| format!("cannot open {}", p.display()))?,
            )),
            None => Box::new(io::stdin().lock()),
        };
        reader.lines().collect::<io::Result<_>>().context("cannot read input")?
    };
    let extractor = ConceptExtractor::bundled();
    let mut buf = Vec::new();
    for text in &texts {
        let concepts = extractor.extract(text).to_strings();
        serde_json::to_writer(&mut buf, &json!({ "text": text, "concepts": concepts }))?;
        buf.push(b'\n');
    }
    match &a.output {
        Some(p) => output::write_all(p, &buf),
        None => Ok(io::stdout().lock().write_all(&buf)?),
    }
}

fn infer_format(path: &Path) -> CorpusFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => CorpusFormat::KeyedJson,
        _ => CorpusFormat::Jsonl,
    }
}

pub fn filter(a: &FilterArgs, jobs: Option<usize>) -> Result<()> {
    distinct_outputs(&[&a.graph.graph, &a.corpus], &[&a.kept, &a.reports, &a.stats])?;
    let format = a.format.unwrap_or_else(|| infer_format(&a.corpus));
    let graph = load_graph(&a.graph)?;
    let extractor = ConceptExtractor::bundled();
    let reader = CorpusReader::open(&a.corpus, format)?;

    let mut kept = CorpusWriter::new(AtomicFile::create(&a.kept)?, format);
    let mut reports = AtomicFile::create(&a.reports)?;
    let mut stats_file = AtomicFile::create(&a.stats)?;
    let options = FilterOptions {
        jobs,
        chunk_size: a.chunk_size,
    };
    let started = Instant::now();
    let mut seen = 0u64;
    let corpus_path = a.corpus.display().to_string();
    let stats = filter_corpus(
        &graph,
        &extractor,
        reader.map(|r| r.with_context(|| format!("cannot read corpus {corpus_path}"))),
        &options,
        |d, r| {
            serde_json::to_writer(&mut reports, &r.to_record())?;
            reports.write_all(b"\n")?;
            if r.has_match {
                kept.write(&d)?;
            }
            seen += 1;
            if a.progress_every > 0 && seen % a.progress_every == 0 {
                eprintln!("filter: {seen} dialogues in {:.1}s", started.elapsed().as_secs_f64());
            }
            Ok(())
        },
    )?;
    serde_json::to_writer_pretty(&mut stats_file, &stats)?;
    writeln!(stats_file)?;
    let kept = kept.finish()?;
    output::commit(vec![kept, reports, stats_file])?;
    print_json(&json!({
        "total": stats.total,
        "kept": stats.kept,
        "kept_fraction": stats.kept_fraction,
        "kept_percent": stats.kept_percent(),
    }))
}

pub fn select(a: &SelectPromptsArgs) -> Result<()> {
    let inputs: Vec<&Path> = std::iter::once(a.contexts.as_path())
        .chain(a.names.as_deref())
        .collect();
    distinct_outputs(&inputs, &[&a.kept, &a.rejected])?;
    let names = match &a.names {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read names from {}", p.display()))?;
            NameDetector::new(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(str::to_owned),
            )
        }
        None => NameDetector::bundled(),
    };
    let file = File::open(&a.contexts).with_context(|| format!("cannot open {}", a.contexts.display()))?;
    let mut kept = AtomicFile::create(&a.kept)?;
    let mut rejected = AtomicFile::create(&a.rejected)?;
    let summary = select_prompts(read_contexts(BufReader::new(file)), &names, &mut kept, &mut rejected)
        .with_context(|| format!("cannot select prompts from {}", a.contexts.display()))?;
    output::commit(vec![kept, rejected])?;
    print_json(&summary)
}

/// Turns `\n`, `\t` and `\\` into the characters they name.
fn unescape(s: &str) -> Result<String> {
    let mut out = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            other => {
                let shown = other.map_or_else(String::new, String::from);
                return Err(usage(format!("unsupported escape \\{shown} in --separator")));
            }
        }
    }
    Ok(out)
}

fn feature_config(a: &FeatureArgs) -> Result<FeatureConfig> {
    Ok(FeatureConfig {
        two_hop_cap: a.two_hop_cap,
        scope: a.history,
        separator: unescape(&a.separator)?,
        lm_batch: a.lm_batch,
    })
}

/// The scorer named on the command line. Without one, symbolic-only work
/// falls back to the null scorer; anything needing LM features fails.
fn connect_scorer(a: &ScorerArgs, needs_lm: bool) -> Result<Box<dyn LmScorer>> {
    if a.null_scorer {
        if needs_lm {
            log::warn!("null scorer: neural features are constant");
        }
        return Ok(Box::new(NullScorer));
    }
    let Some(raw) = a.scorer.as_deref().filter(|s| !s.trim().is_empty()) else {
        if needs_lm {
            return Err(usage(
                "neural features need a scorer: pass --scorer, set CSDIAL_SCORER, or use --null-scorer",
            ));
        }
        return Ok(Box::new(NullScorer));
    };
    let timeout = Duration::try_from_secs_f64(a.scorer_timeout)
        .map_err(|_| usage("--scorer-timeout must be a positive number of seconds"))?;
    let endpoint = raw
        .parse::<ScorerEndpoint>()
        .and_then(|e| e.with_timeout(timeout))
        .map_err(|e| usage(e.to_string()))?
        .with_retries(a.scorer_retries);
    log::info!("scorer {endpoint}");
    Ok(endpoint.connect()?)
}

fn hyper(a: &HyperArgs) -> Result<Hyper> {
    if a.hidden.is_empty() || a.hidden.contains(&0) {
        return Err(usage("--hidden widths must be positive"));
    }
    if a.batch_size == 0 || a.epochs == 0 {
        return Err(usage("--batch-size and --epochs must be positive"));
    }
    if !(a.learning_rate > 0.0 && a.learning_rate.is_finite()) {
        return Err(usage("--learning-rate must be positive"));
    }
    if !(0.0..1.0).contains(&a.dev_fraction) {
        return Err(usage("--dev-fraction must be in [0, 1)"));
    }
    Ok(Hyper {
        hidden: a.hidden.clone(),
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        max_epochs: a.epochs,
        patience: a.patience,
        dev_fraction: a.dev_fraction,
    })
}

fn load_annotations(a: &DataArgs) -> Result<Vec<AnnotatedExample>> {
    let rows = read_annotations_path(&a.annotations)
        .with_context(|| format!("cannot read annotations {}", a.annotations.display()))?;
    Ok(if a.average { average_annotations(&rows) } else { rows })
}

fn featurized(
    data: &DataArgs,
    graph: &GraphArgs,
    scorer: &ScorerArgs,
    features: &FeatureArgs,
    needs_lm: bool,
) -> Result<(Vec<AnnotatedExample>, Vec<(FeatureVector, f64)>)> {
    let config = feature_config(features)?;
    let scorer = connect_scorer(scorer, needs_lm)?;
    let rows = load_annotations(data)?;
    let graph = load_graph(graph)?;
    let featurizer = Featurizer::new(&graph, scorer.as_ref()).with_config(config);
    let started = Instant::now();
    let pairs = featurize_dataset(&rows, &featurizer)?;
    log::info!(
        "featurized {} rows in {:.1}s",
        pairs.len(),
        started.elapsed().as_secs_f64()
    );
    Ok((rows, pairs))
}

pub fn featurize(a: &FeaturizeArgs) -> Result<()> {
    distinct_outputs(&[&a.data.annotations, &a.graph.graph], &[&a.output])?;
    let (rows, pairs) = featurized(&a.data, &a.graph, &a.scorer, &a.features, true)?;
    let mut out = AtomicFile::create(&a.output)?;
    for (row, (fv, y)) in rows.iter().zip(&pairs) {
        serde_json::to_writer(
            &mut out,
            &json!({ "dialogue_id": row.dialogue_id, "features": fv, "human_score": y }),
        )?;
        out.write_all(b"\n")?;
    }
    output::commit(vec![out])?;
    print_json(&json!({ "rows": rows.len() }))
}

pub fn train_model(a: &TrainArgs, seed: u64) -> Result<()> {
    distinct_outputs(&[&a.data.annotations, &a.graph.graph], &[&a.model])?;
    let hyper = hyper(&a.hyper)?;
    let needs_lm = a.mask != FeatureMask::Symbolic;
    let (_, pairs) = featurized(&a.data, &a.graph, &a.scorer, &a.features, needs_lm)?;
    let started = Instant::now();
    let model = train(&pairs, a.mask, &hyper, seed)?;
    let t = model.training();
    log::info!(
        "trained for {} epochs in {:.1}s",
        t.epochs,
        started.elapsed().as_secs_f64()
    );
    let mut text = model.to_json();
    text.push('\n');
    output::write_all(&a.model, text.as_bytes())?;
    print_json(&json!({
        "model": a.model.display().to_string(),
        "mask": a.mask,
        "examples": pairs.len(),
        "seed": seed,
        "epochs": t.epochs,
        "best_epoch": t.best_epoch,
        "final_train_loss": t.final_train_loss,
        "best_monitor_loss": t.best_monitor_loss,
    }))
}

/// Parses score input rows, keeping each row's JSON for the output.
fn read_score_rows(path: &Path) -> Result<Vec<(Value, Vec<Turn>, Turn)>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let at = || format!("{}: line {}", path.display(), i + 1);
        let line = line.with_context(at)?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).with_context(at)?;
        if !value.is_object() {
            return Err(anyhow!("expected a JSON object")).with_context(at);
        }
        let history: Vec<Turn> = match value.get("history") {
            Some(h) => serde_json::from_value(h.clone()).with_context(|| format!("{}: bad \"history\"", at()))?,
            None => Vec::new(),
        };
        let response: Turn = value
            .get("response")
            .ok_or_else(|| anyhow!("missing \"response\""))
            .and_then(|r| Ok(serde_json::from_value(r.clone())?))
            .with_context(|| format!("{}: bad \"response\"", at()))?;
        if response.text.trim().is_empty() {
            return Err(anyhow!("response text is empty")).with_context(at);
        }
        rows.push((value, history, response));
    }
    Ok(rows)
}

pub fn score(a: &ScoreArgs) -> Result<()> {
    distinct_outputs(&[&a.model, &a.input, &a.graph.graph], &[&a.output])?;
    let config = feature_config(&a.features)?;
    let text = fs::read_to_string(&a.model).with_context(|| format!("cannot read model {}", a.model.display()))?;
    let model = RegressorModel::from_json(&text).with_context(|| format!("cannot load {}", a.model.display()))?;
    let scorer = connect_scorer(&a.scorer, model.mask() != FeatureMask::Symbolic)?;
    let rows = read_score_rows(&a.input)?;
    let graph = load_graph(&a.graph)?;
    let featurizer = Featurizer::new(&graph, scorer.as_ref()).with_config(config);
    let pairs: Vec<(&[Turn], &Turn)> = rows.iter().map(|(_, h, r)| (h.as_slice(), r)).collect();
    let features = featurizer.featurize_many(&pairs)?;

    let mut out = AtomicFile::create(&a.output)?;
    for ((value, _, _), fv) in rows.iter().zip(&features) {
        let mut value = value.clone();
        value["predicted_score"] = json!(model.predict(fv));
        serde_json::to_writer(&mut out, &value)?;
        out.write_all(b"\n")?;
    }
    output::commit(vec![out])?;
    print_json(&json!({ "scored": rows.len(), "mask": model.mask() }))
}

pub fn evaluate(a: &EvaluateArgs, seed: u64) -> Result<()> {
    distinct_outputs(&[&a.data.annotations, &a.graph.graph], &[&a.report])?;
    if a.mask.is_empty() {
        return Err(usage("--mask needs at least one value"));
    }
    if a.folds < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    let hyper = hyper(&a.hyper)?;
    let needs_lm = a.mask.iter().any(|&m| m != FeatureMask::Symbolic);
    let (_, pairs) = featurized(&a.data, &a.graph, &a.scorer, &a.features, needs_lm)?;

    let mut reports = Vec::with_capacity(a.mask.len());
    for &mask in &a.mask {
        let started = Instant::now();
        let report = cross_validate_features(&pairs, mask, a.folds, &hyper, seed)?;
        log::info!("{mask}: {} folds in {:.1}s", a.folds, started.elapsed().as_secs_f64());
        reports.push(report);
    }
    let doc = json!({
        "examples": pairs.len(),
        "folds": a.folds,
        "seed": seed,
        "reports": reports,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    output::write_all(&a.report, text.as_bytes())?;
    for r in &reports {
        print_json(&json!({ "mask": r.mask, "rho": r.pooled.rho, "p": r.pooled.p, "n": r.pooled.n }))?;
    }
    Ok(())
}

/// Stats from a stats JSON object, or rebuilt from report lines.
fn read_stats(path: &Path) -> Result<CorpusStats> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if let Ok(stats) = serde_json::from_str::<CorpusStats>(&text) {
        return Ok(stats);
    }
    let mut acc = StatsAccumulator::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ReportRecord = serde_json::from_str(line).with_context(|| {
            format!(
                "{}: line {}: neither a stats object nor a report line",
                path.display(),
                i + 1
            )
        })?;
        acc.add_record(&record);
    }
    Ok(acc.finish())
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let stats = read_stats(&a.input)?;
    if a.json {
        print_json(&stats)
    } else {
        Ok(io::stdout().lock().write_all(stats.to_table().as_bytes())?)
    }
}
