//! Dataset records, title aggregation, splitting, and the token pipeline
//! (tokenize → linearize → vocabulary → ids).

mod encode;
mod linearize;
mod tokenize;
mod vocab;

pub use encode::{encode_example, encode_target, encode_tokens, render_title, EncodedExample};
pub use linearize::{linearize, FieldConfig, MAX_SOURCE_TOKENS};
pub use tokenize::tokenize;
pub use vocab::{
    build_vocab, Vocabulary, FIELD_MARKERS, FIRST_MARKER_ID, FIRST_REGULAR_ID, NUM_RESERVED,
    PAD_ID, PAD_TOKEN, START_ID, START_TOKEN, STOP_ID, STOP_TOKEN, UNK_ID, UNK_TOKEN,
};

use crate::error::{Error, Result};
use crate::extract::TableContext;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Minimum corpus size for a meaningful 80/10/10 split.
pub const MIN_SPLIT_RECORDS: usize = 10;

/// Which split a record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "validation" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One table with its context, candidate titles, and (once aggregated) the
/// accepted reference title.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetRecord {
    pub context: TableContext,
    /// Raw candidate titles, e.g. one per annotator.
    pub candidate_titles: Vec<String>,
    /// The accepted reference title; empty until aggregation has run.
    pub title: String,
    /// Whether the accepted title occurs verbatim in the table context.
    pub title_verbatim: bool,
    /// Split label; `None` until the corpus has been split.
    pub split: Option<Split>,
}

/// On-disk JSON shape of a record: token lists are stored as space-joined
/// strings and the split as plain text (empty = unassigned).
#[derive(Serialize, Deserialize)]
struct RecordRepr {
    page_title: String,
    section_headings: Vec<(u8, String)>,
    captions: Vec<String>,
    spanning_headers: Vec<String>,
    column_headers: Vec<String>,
    prefix_text: String,
    suffix_text: String,
    table_rows: Vec<String>,
    candidate_titles: Vec<String>,
    title: String,
    title_verbatim: bool,
    split: String,
    #[serde(default)]
    table_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_url: Option<String>,
}

fn join(tokens: &[String]) -> String {
    tokens.join(" ")
}

impl DatasetRecord {
    /// Serializes the record as a single JSON line.
    pub fn to_json(&self) -> Result<String> {
        let c = &self.context;
        let repr = RecordRepr {
            page_title: join(&c.page_title),
            section_headings: c
                .section_headings
                .iter()
                .map(|(level, toks)| (*level, join(toks)))
                .collect(),
            captions: c.captions.iter().map(|t| join(t)).collect(),
            spanning_headers: c.spanning_headers.iter().map(|t| join(t)).collect(),
            column_headers: c.column_headers.iter().map(|t| join(t)).collect(),
            prefix_text: join(&c.prefix_text),
            suffix_text: join(&c.suffix_text),
            table_rows: c.table_rows.clone(),
            candidate_titles: self.candidate_titles.clone(),
            title: self.title.clone(),
            title_verbatim: self.title_verbatim,
            split: self.split.map(|s| s.as_str().to_string()).unwrap_or_default(),
            table_index: c.table_index,
            source_url: c.source_url.clone(),
        };
        Ok(serde_json::to_string(&repr)?)
    }

    /// Parses a record from one JSON line. Context fields are re-tokenized,
    /// so both token-joined and raw text are accepted.
    pub fn from_json(line: &str) -> Result<Self> {
        let repr: RecordRepr = serde_json::from_str(line)?;
        let split = match repr.split.as_str() {
            "" => None,
            s => Some(Split::parse(s).ok_or_else(|| {
                Error::Json(serde::de::Error::custom(format!("unknown split {s:?}")))
            })?),
        };
        Ok(DatasetRecord {
            context: TableContext {
                page_title: tokenize(&repr.page_title),
                section_headings: repr
                    .section_headings
                    .into_iter()
                    .map(|(level, text)| (level, tokenize(&text)))
                    .collect(),
                captions: repr.captions.iter().map(|t| tokenize(t)).collect(),
                spanning_headers: repr.spanning_headers.iter().map(|t| tokenize(t)).collect(),
                column_headers: repr.column_headers.iter().map(|t| tokenize(t)).collect(),
                prefix_text: tokenize(&repr.prefix_text),
                suffix_text: tokenize(&repr.suffix_text),
                table_rows: repr.table_rows,
                table_index: repr.table_index,
                source_url: repr.source_url,
            },
            candidate_titles: repr.candidate_titles,
            title: repr.title,
            title_verbatim: repr.title_verbatim,
            split,
        })
    }
}

/// Reads a JSON-lines dataset file. Blank lines are ignored.
pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(DatasetRecord::from_json(&line)?);
    }
    Ok(records)
}

/// Writes records as a JSON-lines file, one record per line.
pub fn write_records(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in records {
        writeln!(out, "{}", record.to_json()?)?;
    }
    out.flush()?;
    Ok(())
}

/// Picks the accepted title from a list of candidates.
///
/// If two or more candidates are identical, the majority wins; otherwise the
/// candidate with the most tokens wins. All ties break toward the earliest
/// position in the list.
pub fn aggregate_titles(candidates: &[String]) -> Result<String> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    // Majority: earliest candidate with the highest duplicate count >= 2.
    let mut best_majority: Option<(usize, usize)> = None; // (count, first index)
    for (i, cand) in candidates.iter().enumerate() {
        if candidates[..i].contains(cand) {
            continue; // already counted at its first occurrence
        }
        let count = candidates.iter().filter(|c| *c == cand).count();
        if count >= 2 && best_majority.is_none_or(|(c, _)| count > c) {
            best_majority = Some((count, i));
        }
    }
    if let Some((_, i)) = best_majority {
        return Ok(candidates[i].clone());
    }
    // No majority: most tokens, earliest on tie.
    let i = candidates
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            tokenize(a)
                .len()
                .cmp(&tokenize(b).len())
                .then(ib.cmp(ia)) // earlier index wins a tie
        })
        .map(|(i, _)| i)
        .expect("non-empty candidates");
    Ok(candidates[i].clone())
}

/// Whether `title` occurs as a contiguous token run inside any single
/// context field.
pub fn title_verbatim(context: &TableContext, title: &str) -> bool {
    let needle = tokenize(title);
    if needle.is_empty() {
        return false;
    }
    let mut streams: Vec<Vec<String>> = vec![context.page_title.clone()];
    streams.extend(context.section_headings.iter().map(|(_, t)| t.clone()));
    streams.extend(context.captions.iter().cloned());
    streams.extend(context.spanning_headers.iter().cloned());
    streams.extend(context.column_headers.iter().cloned());
    streams.push(context.prefix_text.clone());
    streams.push(context.suffix_text.clone());
    streams.extend(context.table_rows.iter().map(|r| tokenize(r)));
    streams
        .iter()
        .any(|hay| hay.windows(needle.len()).any(|w| w == needle.as_slice()))
}

/// How many records landed in each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// Assigns 80/10/10 split labels in place.
///
/// Records are shuffled by a seeded generator purely to decide membership;
/// their order in the slice is untouched. Validation and test each get
/// `n / 10` records (rounded down) and the remainder goes to train.
pub fn split_dataset(records: &mut [DatasetRecord], seed: u64) -> Result<SplitCounts> {
    let n = records.len();
    if n < MIN_SPLIT_RECORDS {
        return Err(Error::TooFewRecords {
            count: n,
            minimum: MIN_SPLIT_RECORDS,
        });
    }
    let n_val = n / 10;
    let n_test = n / 10;
    let n_train = n - n_val - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    for (rank, &i) in order.iter().enumerate() {
        records[i].split = Some(if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Validation
        } else {
            Split::Test
        });
    }
    Ok(SplitCounts {
        train: n_train,
        validation: n_val,
        test: n_test,
    })
}
