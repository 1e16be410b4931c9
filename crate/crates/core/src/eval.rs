//! ROUGE scoring, extractive baselines, and batch evaluation reports.
//!
//! All metrics are F1 against a single reference, with the corpus
//! tokenizer as the only tokenization. ROUGE-1/2 count n-gram multiset
//! overlap; ROUGE-L uses the longest common subsequence.

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::extract::TableContext;
use std::collections::HashMap;

/// F1 over n-gram multiset overlap; 0 when either side has no n-grams.
pub fn rouge_n(candidate: &[String], reference: &[String], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be positive");
    if candidate.len() < n || reference.len() < n {
        return 0.0;
    }
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    for gram in reference.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    let mut matches = 0usize;
    for gram in candidate.windows(n) {
        if let Some(left) = counts.get_mut(gram) {
            if *left > 0 {
                *left -= 1;
                matches += 1;
            }
        }
    }
    let candidate_grams = candidate.len() - n + 1;
    let reference_grams = reference.len() - n + 1;
    f1(matches as f64, candidate_grams as f64, reference_grams as f64)
}

/// F1 from the longest common subsequence; 0 when either side is empty.
pub fn rouge_l(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(candidate, reference);
    f1(lcs as f64, candidate.len() as f64, reference.len() as f64)
}

fn f1(matches: f64, candidate_total: f64, reference_total: f64) -> f64 {
    if matches == 0.0 {
        return 0.0;
    }
    let p = matches / candidate_total;
    let r = matches / reference_total;
    2.0 * p * r / (p + r)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    // One-row dynamic program over positions of `b`.
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y {
                diag + 1
            } else {
                row[j].max(row[j + 1])
            };
            diag = up;
        }
    }
    row[b.len()]
}

/// The page-title selection baseline.
///
/// Joins the page-title tokens, dropping everything from the last `|` or
/// `-` delimiter onward when tokens precede it — page titles often carry a
/// site-name tail such as `- wikipedia`.
pub fn baseline_page_title(context: &TableContext) -> String {
    let tokens = &context.page_title;
    let cut = tokens
        .iter()
        .rposition(|t| t == "|" || t == "-")
        .filter(|&i| i >= 1)
        .unwrap_or(tokens.len());
    tokens[..cut].join(" ")
}

/// The nearest-section-heading selection baseline.
///
/// Takes the innermost (last) heading and removes any `[ edit ]` token
/// runs; falls back to the page-title baseline when the table has no
/// headings above it.
pub fn baseline_section_heading(context: &TableContext) -> String {
    match context.section_headings.last() {
        Some((_, tokens)) => {
            let mut out: Vec<&str> = Vec::with_capacity(tokens.len());
            let mut i = 0;
            while i < tokens.len() {
                if tokens[i] == "["
                    && tokens.get(i + 1).map(String::as_str) == Some("edit")
                    && tokens.get(i + 2).map(String::as_str) == Some("]")
                {
                    i += 3;
                } else {
                    out.push(&tokens[i]);
                    i += 1;
                }
            }
            out.join(" ")
        }
        None => baseline_page_title(context),
    }
}

/// Scores for one prediction against its reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleScores {
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
}

/// Aggregate scores for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemScores {
    pub name: String,
    pub rows: Vec<ExampleScores>,
    pub mean_rouge1: f64,
    pub mean_rouge2: f64,
    pub mean_rouge_l: f64,
    /// Number of scored examples.
    pub n: usize,
    /// Predictions that tokenized to nothing.
    pub n_empty: usize,
}

/// Per-system evaluation over a shared reference list.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub systems: Vec<SystemScores>,
}

/// Scores each system's predictions against the references.
///
/// Systems keep their given order in the report. Empty predictions score
/// 0 on every metric and are tallied separately.
pub fn evaluate(systems: &[(String, Vec<String>)], references: &[String]) -> Result<EvalReport> {
    let reference_tokens: Vec<Vec<String>> = references.iter().map(|r| tokenize(r)).collect();
    let mut report = EvalReport { systems: Vec::new() };
    for (name, predictions) in systems {
        if predictions.len() != references.len() {
            return Err(Error::LengthMismatch {
                system: name.clone(),
                predictions: predictions.len(),
                references: references.len(),
            });
        }
        let mut rows = Vec::with_capacity(predictions.len());
        let mut n_empty = 0usize;
        for (prediction, reference) in predictions.iter().zip(&reference_tokens) {
            let tokens = tokenize(prediction);
            if tokens.is_empty() {
                n_empty += 1;
            }
            rows.push(ExampleScores {
                rouge1: rouge_n(&tokens, reference, 1),
                rouge2: rouge_n(&tokens, reference, 2),
                rouge_l: rouge_l(&tokens, reference),
            });
        }
        let n = rows.len();
        let mean = |f: fn(&ExampleScores) -> f64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<f64>() / n as f64
            }
        };
        report.systems.push(SystemScores {
            name: name.clone(),
            mean_rouge1: mean(|r| r.rouge1),
            mean_rouge2: mean(|r| r.rouge2),
            mean_rouge_l: mean(|r| r.rouge_l),
            rows,
            n,
            n_empty,
        });
    }
    Ok(report)
}

impl EvalReport {
    /// Tab-separated rows, one per system, with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("system\trouge1\trouge2\trougeL\tn\tn_empty\n");
        for s in &self.systems {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\n",
                s.name, s.mean_rouge1, s.mean_rouge2, s.mean_rouge_l, s.n, s.n_empty
            ));
        }
        out
    }

    /// Human-readable aligned comparison table.
    pub fn render(&self) -> String {
        let name_width = self
            .systems
            .iter()
            .map(|s| s.name.len())
            .chain(std::iter::once("system".len()))
            .max()
            .unwrap_or(6);
        let mut out = format!(
            "{:<name_width$}  {:>8}  {:>8}  {:>8}  {:>6}  {:>7}\n",
            "system", "rouge1", "rouge2", "rougeL", "n", "empty"
        );
        for s in &self.systems {
            out.push_str(&format!(
                "{:<name_width$}  {:>8.4}  {:>8.4}  {:>8.4}  {:>6}  {:>7}\n",
                s.name, s.mean_rouge1, s.mean_rouge2, s.mean_rouge_l, s.n, s.n_empty
            ));
        }
        out
    }
}
