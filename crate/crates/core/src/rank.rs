//! Ranking of scored candidates and evaluation against gold keyphrases.
//!
//! Ordering is total and deterministic: classifier score, then tf-idf,
//! then earliest occurrence, then the normalized form. Evaluation matches
//! extracted phrases to gold phrases one-to-one on their normalized
//! (stemmed) forms, and corpus-level figures are macro averages — plain
//! means of the per-document precision, recall, and F1.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RankedKeyphrase {
    /// Surface form of the phrase's first occurrence.
    pub surface: String,
    /// Stemmed, space-joined form; the merge and matching key.
    pub normalized: String,
    /// Ensemble probability of being a keyphrase.
    pub score: f64,
    pub tfidf: f64,
    /// Start index of the first occurrence over the document word count.
    pub first_pos: f64,
    pub tf: u32,
}

fn ranking_order(a: &RankedKeyphrase, b: &RankedKeyphrase) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.tfidf.total_cmp(&a.tfidf))
        .then_with(|| a.first_pos.total_cmp(&b.first_pos))
        .then_with(|| a.normalized.cmp(&b.normalized))
}

pub fn sort_ranked(items: &mut [RankedKeyphrase]) {
    items.sort_unstable_by(ranking_order);
}

/// Sorts and keeps the best `n` (`n >= 1`); fewer come back when the
/// document has fewer candidates.
pub fn extract_top_n(mut items: Vec<RankedKeyphrase>, n: usize) -> Result<Vec<RankedKeyphrase>> {
    if n == 0 {
        return Err(Error::InvalidArgument("extraction count must be at least 1".into()));
    }
    sort_ranked(&mut items);
    items.truncate(n);
    Ok(items)
}

/// One-to-one matching on normalized forms: each gold phrase can be claimed
/// by at most one extracted phrase. Returns the number matched.
pub fn match_keyphrases(extracted: &[RankedKeyphrase], gold_normalized: &HashSet<String>) -> usize {
    let mut unclaimed: HashSet<&str> = gold_normalized.iter().map(String::as_str).collect();
    extracted.iter().filter(|k| unclaimed.remove(k.normalized.as_str())).count()
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        return 0.0;
    }
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DocEvaluation {
    pub doc_id: String,
    pub extracted: usize,
    pub gold: usize,
    pub identified: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn evaluate_doc(
    doc_id: &str,
    extracted: &[RankedKeyphrase],
    gold_normalized: &HashSet<String>,
) -> DocEvaluation {
    let identified = match_keyphrases(extracted, gold_normalized);
    let precision =
        if extracted.is_empty() { 0.0 } else { identified as f64 / extracted.len() as f64 };
    let recall =
        if gold_normalized.is_empty() { 0.0 } else { identified as f64 / gold_normalized.len() as f64 };
    DocEvaluation {
        doc_id: doc_id.to_string(),
        extracted: extracted.len(),
        gold: gold_normalized.len(),
        identified,
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Macro-averaged corpus evaluation. `mean_identified` is the average
/// number of correctly extracted phrases per document.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvaluationReport {
    pub documents: usize,
    pub mean_extracted: f64,
    pub mean_identified: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_doc: Vec<DocEvaluation>,
}

impl EvaluationReport {
    pub fn from_per_doc(per_doc: Vec<DocEvaluation>) -> Self {
        let n = per_doc.len() as f64;
        let mean = |f: &dyn Fn(&DocEvaluation) -> f64| {
            if per_doc.is_empty() {
                0.0
            } else {
                per_doc.iter().map(f).sum::<f64>() / n
            }
        };
        EvaluationReport {
            documents: per_doc.len(),
            mean_extracted: mean(&|d| d.extracted as f64),
            mean_identified: mean(&|d| d.identified as f64),
            precision: mean(&|d| d.precision),
            recall: mean(&|d| d.recall),
            f1: mean(&|d| d.f1),
            per_doc,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Fixed-width summary table, one line per labeled run, percentages with
/// two decimals.
pub fn format_report_table(rows: &[(String, &EvaluationReport)]) -> String {
    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(1).max(3);
    let mut out = format!(
        "{:<label_width$}  {:>22}  {:>6}  {:>6}  {:>6}\n",
        "run", "#Keyphrases Identified", "P", "R", "F1"
    );
    for (label, report) in rows {
        out.push_str(&format!(
            "{:<label_width$}  {:>22.2}  {:>6.2}  {:>6.2}  {:>6.2}\n",
            label,
            report.mean_identified,
            report.precision * 100.0,
            report.recall * 100.0,
            report.f1 * 100.0
        ));
    }
    out
}
