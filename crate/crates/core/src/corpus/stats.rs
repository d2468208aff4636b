use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::matching::{DialogueMatchReport, ReportRecord};

/// Min / mean / max of per-dialogue match counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchSummary {
    pub min: u64,
    pub mean: f64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: u64,
    pub kept: u64,
    pub kept_fraction: f64,
    pub relation_histogram: BTreeMap<String, u64>,
    pub matches_per_dialogue: MatchSummary,
}

impl CorpusStats {
    /// Builds stats from the kept/total counts alone.
    pub fn from_counts(total: u64, kept: u64) -> Self {
        CorpusStats {
            total,
            kept,
            kept_fraction: fraction(kept, total),
            ..Default::default()
        }
    }

    /// `kept_fraction` as a percentage with one decimal, e.g. "63.6%".
    pub fn kept_percent(&self) -> String {
        format!("{:.1}%", self.kept_fraction * 100.0)
    }

    /// Aligned plain-text summary.
    pub fn to_table(&self) -> String {
        let m = &self.matches_per_dialogue;
        let mut rows: Vec<(String, String)> = vec![
            ("dialogues".into(), self.total.to_string()),
            ("kept".into(), self.kept.to_string()),
            ("kept fraction".into(), self.kept_percent()),
            ("matches/dialogue min".into(), m.min.to_string()),
            ("matches/dialogue mean".into(), format!("{:.3}", m.mean)),
            ("matches/dialogue max".into(), m.max.to_string()),
        ];
        let split = rows.len();
        rows.extend(
            self.relation_histogram
                .iter()
                .map(|(r, c)| (format!("relation {r}"), c.to_string())),
        );
        let kw = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let vw = rows.iter().map(|(_, v)| v.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (i, (k, v)) in rows.iter().enumerate() {
            if i == split {
                out.push('\n');
            }
            let _ = writeln!(out, "{k:<kw$}  {v:>vw$}");
        }
        out
    }
}

fn fraction(kept: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        kept as f64 / total as f64
    }
}

/// Order-independent accumulator behind [`CorpusStats`].
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    total: u64,
    kept: u64,
    match_sum: u64,
    match_min: Option<u64>,
    match_max: u64,
    relations: BTreeMap<String, u64>,
}

impl StatsAccumulator {
    pub fn add(&mut self, report: &DialogueMatchReport) {
        self.count(
            report.has_match,
            report.total_matches() as u64,
            report.relation_counts(),
        );
    }

    /// Same as [`add`](Self::add) for a report read back from JSON.
    pub fn add_record(&mut self, record: &ReportRecord) {
        let mut relations = BTreeMap::new();
        let mut n = 0u64;
        for p in &record.pairs {
            n += p.one_hop_count as u64;
            for m in &p.matches {
                *relations.entry(m.relation.clone()).or_insert(0) += 1;
            }
        }
        self.count(record.has_match, n, relations);
    }

    fn count(&mut self, has_match: bool, n: u64, relations: BTreeMap<String, u64>) {
        self.total += 1;
        if has_match {
            self.kept += 1;
        }
        self.match_sum += n;
        self.match_min = Some(self.match_min.map_or(n, |m| m.min(n)));
        self.match_max = self.match_max.max(n);
        for (rel, c) in relations {
            *self.relations.entry(rel).or_insert(0) += c;
        }
    }

    pub fn merge(&mut self, other: StatsAccumulator) {
        self.total += other.total;
        self.kept += other.kept;
        self.match_sum += other.match_sum;
        self.match_min = match (self.match_min, other.match_min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.match_max = self.match_max.max(other.match_max);
        for (rel, c) in other.relations {
            *self.relations.entry(rel).or_insert(0) += c;
        }
    }

    pub fn finish(&self) -> CorpusStats {
        CorpusStats {
            total: self.total,
            kept: self.kept,
            kept_fraction: fraction(self.kept, self.total),
            relation_histogram: self.relations.clone(),
            matches_per_dialogue: MatchSummary {
                min: self.match_min.unwrap_or(0),
                mean: if self.total == 0 {
                    0.0
                } else {
                    self.match_sum as f64 / self.total as f64
                },
                max: self.match_max,
            },
        }
    }
}
