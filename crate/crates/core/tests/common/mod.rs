//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use csdial::concepts::ConceptExtractor;
use csdial::kg::{ConceptGraph, Triple};
use csdial::matching::Direction;
use csdial::{ConceptSet, Dialogue};
use rand::seq::SliceRandom;
use rand::Rng;

pub const RELATIONS: [&str; 4] = ["RelatedTo", "IsA", "UsedFor", "AtLocation"];

pub fn doctor_graph() -> ConceptGraph {
    ConceptGraph::from_triples([
        Triple::parse("specialist", "TypeOf", "doctor"),
        Triple::parse("doctor", "LocateAt", "hospital"),
        Triple::parse("patient", "RelatedTo", "doctor"),
    ])
}

pub const DOCTOR_TURNS: [&str; 2] = [
    "Hi, I want to find a doctor",
    "What kind of doctor are you looking for? A general doctor or a specialist?",
];

/// Short lowercase concept names: "ca", "cb", ...
pub fn concept_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let mut s = String::from("c");
            let mut k = i;
            loop {
                s.push((b'a' + (k % 26) as u8) as char);
                k /= 26;
                if k == 0 {
                    break;
                }
            }
            s
        })
        .collect()
}

/// Triples as `(head, relation, tail)` index tuples into a word list.
pub type RawTriple = (usize, usize, usize);

pub fn build_graph(words: &[String], raw: &[RawTriple]) -> ConceptGraph {
    ConceptGraph::from_triples(
        raw.iter()
            .filter(|(h, _, t)| h != t)
            .map(|&(h, r, t)| Triple::parse(&words[h], RELATIONS[r % RELATIONS.len()], &words[t])),
    )
}

pub fn build_set(words: &[String], idx: &[usize]) -> ConceptSet {
    ConceptSet::of(idx.iter().map(|&i| words[i].as_str()))
}

pub fn random_raw_triples(rng: &mut impl Rng, words: usize, max_triples: usize) -> Vec<RawTriple> {
    let n = rng.gen_range(0..=max_triples);
    (0..n)
        .map(|_| {
            (
                rng.gen_range(0..words),
                rng.gen_range(0..RELATIONS.len()),
                rng.gen_range(0..words),
            )
        })
        .collect()
}

pub fn random_indices(rng: &mut impl Rng, words: usize, max: usize) -> Vec<usize> {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| rng.gen_range(0..words)).collect()
}

/// Every triple read in both orientations, in graph order, Forward first.
pub fn oracle_matches(g: &ConceptGraph, earlier: &ConceptSet, later: &ConceptSet) -> Vec<(String, Direction)> {
    let mut out = Vec::new();
    for t in g.triples() {
        let (h, r) = (t.head().as_str(), t.tail().as_str());
        if earlier.contains(h) && later.contains(r) {
            out.push((t.to_string(), Direction::Forward));
        }
        if earlier.contains(r) && later.contains(h) {
            out.push((t.to_string(), Direction::Backward));
        }
    }
    out
}

/// Counts ordered pairs of distinct triples `(t1, t2)` over every
/// orientation where `t1 = (a, m)`, `t2 = (m, b)`, `a` earlier, `b` later,
/// and `a`, `m`, `b` pairwise distinct.
pub fn oracle_two_hop(g: &ConceptGraph, earlier: &ConceptSet, later: &ConceptSet) -> u64 {
    let ends: Vec<(&str, &str)> = g.triples().map(|t| (t.head().as_str(), t.tail().as_str())).collect();
    let mut count = 0;
    for (i, &(h1, t1)) in ends.iter().enumerate() {
        for (j, &(h2, t2)) in ends.iter().enumerate() {
            if i == j {
                continue;
            }
            for (a, m) in [(h1, t1), (t1, h1)] {
                for (m2, b) in [(h2, t2), (t2, h2)] {
                    if m == m2 && a != b && a != m && b != m && earlier.contains(a) && later.contains(b) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Dialogues of 2 to 5 turns over `words`, with filler words mixed in.
pub fn random_corpus(rng: &mut impl Rng, words: &[String], dialogues: usize) -> Vec<Dialogue> {
    const FILLERS: [&str; 6] = ["the", "and", "with", "i", "you", "really"];
    (0..dialogues)
        .map(|i| {
            let turns = rng.gen_range(2..=5);
            let texts: Vec<String> = (0..turns)
                .map(|_| {
                    let k = rng.gen_range(1..=4);
                    let mut parts: Vec<&str> = Vec::new();
                    for _ in 0..k {
                        if rng.gen_bool(0.3) {
                            parts.push(FILLERS.choose(rng).unwrap());
                        }
                        parts.push(words.choose(rng).unwrap());
                    }
                    format!("{}.", parts.join(" "))
                })
                .collect();
            Dialogue::alternating(format!("d{i:03}"), None, &texts)
        })
        .collect()
}

/// Brute-force keep verdict: some adjacent turn pair has an oracle match.
pub fn oracle_keep(g: &ConceptGraph, ex: &ConceptExtractor, d: &Dialogue) -> bool {
    let sets: Vec<ConceptSet> = d.turns.iter().map(|t| ex.extract(&t.text)).collect();
    sets.windows(2).any(|w| !oracle_matches(g, &w[0], &w[1]).is_empty())
}

pub fn kept_ids(ds: &[Dialogue]) -> BTreeSet<String> {
    ds.iter().map(|d| d.id.clone()).collect()
}

/// Mid-ranks by counting, straight from the definition: the rank of `x` is
/// one plus the number of smaller values plus half the number of other
/// equal values.
pub fn oracle_mid_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Pearson correlation of the mid-ranks, from sums of products.
pub fn oracle_spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (oracle_mid_ranks(xs), oracle_mid_ranks(ys));
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// A vector drawn from a handful of values, so ties are common.
pub fn tied_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let levels = rng.gen_range(2..=6);
    (0..n).map(|_| rng.gen_range(0..levels) as f64 * 0.5).collect()
}

/// Filter outputs serialized the way the command line writes them: kept
/// dialogues as JSONL, one report record per line, stats as JSON.
pub struct FilterBytes {
    pub kept_ids: BTreeSet<String>,
    pub kept: Vec<u8>,
    pub reports: Vec<u8>,
    pub stats: String,
}

pub fn run_filter(
    g: &ConceptGraph,
    ex: &ConceptExtractor,
    dialogues: &[Dialogue],
    jobs: usize,
    chunk_size: usize,
) -> FilterBytes {
    use csdial::corpus::{filter_corpus, CorpusWriter, FilterOptions};
    use std::io::Write;

    let mut writer = CorpusWriter::new(Vec::new(), csdial::CorpusFormat::Jsonl);
    let mut reports = Vec::new();
    let mut kept_ids = BTreeSet::new();
    let opts = FilterOptions {
        jobs: Some(jobs),
        chunk_size,
    };
    let stats = filter_corpus(g, ex, dialogues.iter().cloned().map(Ok), &opts, |d, r| {
        writeln!(reports, "{}", serde_json::to_string(&r.to_record()).unwrap())?;
        if r.has_match {
            kept_ids.insert(d.id.clone());
            writer.write(&d)?;
        }
        Ok::<_, std::io::Error>(())
    })
    .unwrap();
    FilterBytes {
        kept_ids,
        kept: writer.finish().unwrap(),
        reports,
        stats: serde_json::to_string(&stats).unwrap(),
    }
}

/// Largest relative error between analytic and central-difference
/// gradients over `batches` random networks and batches. Errors are
/// relative to `max(|analytic|, |numeric|, floor)` so that parameters with
/// vanishing gradients do not divide by zero.
pub fn gradient_check(rng: &mut impl Rng, batches: usize, step: f64, floor: f64) -> f64 {
    use csdial::metric::{Mlp, Workspace};

    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < batches {
        let d = rng.gen_range(1..=5);
        let sizes = [d, 32, 32, 1];
        let mut net = Mlp::init(&sizes, rng);
        // Non-zero biases so every code path is exercised.
        for p in net.params_mut().iter_mut() {
            *p += rng.gen_range(-0.1..0.1);
        }
        let m = rng.gen_range(1..=16);
        let xs: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let ys: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // Finite differences are meaningless across a ReLU kink.
        if xs
            .iter()
            .any(|x| net.hidden_preactivations(x).iter().any(|z| z.abs() < 1e-4))
        {
            continue;
        }
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let mut grad = vec![0.0; net.params().len()];
        net.loss_and_gradient(&refs, &ys, &mut grad, &mut Workspace::default());
        for i in 0..grad.len() {
            let orig = net.params()[i];
            net.params_mut()[i] = orig + step;
            let up = net.loss(&refs, &ys);
            net.params_mut()[i] = orig - step;
            let down = net.loss(&refs, &ys);
            net.params_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * step);
            let denom = grad[i].abs().max(numeric.abs()).max(floor);
            worst = worst.max((grad[i] - numeric).abs() / denom);
        }
        done += 1;
    }
    worst
}
