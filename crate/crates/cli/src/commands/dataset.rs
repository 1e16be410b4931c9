//! `dataset`: turn raw extracted records into training-ready data.

use crate::commands::{field_config, FieldFlags};
use crate::config::{manifest_path_for, ConfigFile, Manifest};
use crate::error::{CliError, Result};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use tabletitle::corpus::{
    aggregate_titles, build_vocab, encode_example, linearize, read_records, split_dataset,
    title_verbatim, tokenize, write_records, DatasetRecord, Split, Vocabulary,
};
use tabletitle::Error;

#[derive(Debug, clap::Subcommand)]
pub enum DatasetCommand {
    /// Pick one accepted title per record from its candidate titles.
    Aggregate(AggregateArgs),
    /// Assign 80/10/10 train/validation/test labels.
    Split(SplitArgs),
    /// Build the token vocabulary from the training split.
    BuildVocab(BuildVocabArgs),
    /// Encode records into id sequences (for inspection).
    Encode(EncodeArgs),
}

pub fn run(cmd: &DatasetCommand, cfg: &ConfigFile) -> Result<()> {
    match cmd {
        DatasetCommand::Aggregate(args) => run_aggregate(args, cfg),
        DatasetCommand::Split(args) => run_split(args, cfg),
        DatasetCommand::BuildVocab(args) => run_build_vocab(args, cfg),
        DatasetCommand::Encode(args) => run_encode(args, cfg),
    }
}

// ---------------------------------------------------------------- aggregate

#[derive(Debug, clap::Args)]
pub struct AggregateArgs {
    /// Extracted dataset file.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Aggregated dataset file.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldFlags,
    /// Source length cap used when checking for empty inputs.
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
}

/// How many records each drop rule removed.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct DropCounts {
    /// No candidate titles at all.
    pub no_candidates: usize,
    /// Accepted title tokenizes to nothing.
    pub empty_title: usize,
    /// Linearized context is empty (nothing for the model to read).
    pub empty_source: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.no_candidates + self.empty_title + self.empty_source
    }
}

/// Applies the title-aggregation heuristic and drops degenerate records.
pub fn aggregate_records(
    records: Vec<DatasetRecord>,
    config: &tabletitle::corpus::FieldConfig,
) -> (Vec<DatasetRecord>, DropCounts) {
    let mut kept = Vec::with_capacity(records.len());
    let mut drops = DropCounts::default();
    for mut record in records {
        let title = match aggregate_titles(&record.candidate_titles) {
            Ok(t) => t,
            Err(Error::EmptyCandidates) => {
                drops.no_candidates += 1;
                continue;
            }
            Err(e) => unreachable!("aggregate_titles only fails on empty input: {e}"),
        };
        if tokenize(&title).is_empty() {
            drops.empty_title += 1;
            continue;
        }
        if linearize(&record.context, config).is_empty() {
            drops.empty_source += 1;
            continue;
        }
        record.title_verbatim = title_verbatim(&record.context, &title);
        record.title = title;
        kept.push(record);
    }
    (kept, drops)
}

fn run_aggregate(args: &AggregateArgs, cfg: &ConfigFile) -> Result<()> {
    let input: PathBuf = cfg.resolve_required(&args.input, "input")?;
    let output: PathBuf = cfg.resolve_required(&args.output, "output")?;
    let (include_rows, include_prefix_suffix) = args.fields.resolve(cfg)?;
    let max_tokens = cfg.resolve(&args.max_tokens, "max_tokens", 150)?;
    let config = field_config(include_rows, include_prefix_suffix, max_tokens);

    let records = read_records(&input)?;
    let total = records.len();
    let (kept, drops) = aggregate_records(records, &config);
    if drops.total() > 0 {
        log::warn!(
            "dropped {} of {} record(s): {} without candidates, {} with empty titles, {} with empty inputs",
            drops.total(), total, drops.no_candidates, drops.empty_title, drops.empty_source
        );
    }
    write_records(&output, &kept)?;
    log::info!("aggregated {} record(s) into {}", kept.len(), output.display());

    let mut m = Manifest::new("dataset aggregate");
    m.push("input", input.display());
    m.push("output", output.display());
    m.push("include_rows", include_rows);
    m.push("include_prefix_suffix", include_prefix_suffix);
    m.push("max_tokens", max_tokens);
    m.push("dropped", drops.total());
    m.push_digest("dataset", &input)?;
    m.write(&manifest_path_for(&output))?;
    Ok(())
}

// -------------------------------------------------------------------- split

#[derive(Debug, clap::Args)]
pub struct SplitArgs {
    /// Aggregated dataset file.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Split dataset file.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Shuffle seed for split assignment.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn run_split(args: &SplitArgs, cfg: &ConfigFile) -> Result<()> {
    let input: PathBuf = cfg.resolve_required(&args.input, "input")?;
    let output: PathBuf = cfg.resolve_required(&args.output, "output")?;
    let seed = cfg.resolve(&args.seed, "seed", 13)?;

    let mut records = read_records(&input)?;
    let counts = split_dataset(&mut records, seed)?;
    write_records(&output, &records)?;
    log::info!(
        "split {} record(s): {} train, {} validation, {} test",
        records.len(),
        counts.train,
        counts.validation,
        counts.test
    );

    let mut m = Manifest::new("dataset split");
    m.push("input", input.display());
    m.push("output", output.display());
    m.push("seed", seed);
    m.push("train", counts.train);
    m.push("validation", counts.validation);
    m.push("test", counts.test);
    m.push_digest("dataset", &input)?;
    m.write(&manifest_path_for(&output))?;
    Ok(())
}

// -------------------------------------------------------------- build-vocab

#[derive(Debug, clap::Args)]
pub struct BuildVocabArgs {
    /// Split dataset file.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Vocabulary file (one token per line).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldFlags,
    /// Source length cap applied while collecting tokens.
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
}

/// Keeps only training-split records; errors when there are none.
pub fn training_subset(records: &[DatasetRecord]) -> Result<Vec<DatasetRecord>> {
    let train: Vec<DatasetRecord> = records
        .iter()
        .filter(|r| r.split == Some(Split::Train))
        .cloned()
        .collect();
    if train.is_empty() {
        return Err(Error::EmptyCorpus.into());
    }
    Ok(train)
}

fn run_build_vocab(args: &BuildVocabArgs, cfg: &ConfigFile) -> Result<()> {
    let input: PathBuf = cfg.resolve_required(&args.input, "input")?;
    let output: PathBuf = cfg.resolve_required(&args.output, "output")?;
    let (include_rows, include_prefix_suffix) = args.fields.resolve(cfg)?;
    let max_tokens = cfg.resolve(&args.max_tokens, "max_tokens", 150)?;
    let config = field_config(include_rows, include_prefix_suffix, max_tokens);

    let records = read_records(&input)?;
    let train = training_subset(&records)?;
    let vocab = build_vocab(&train, &config)?;
    vocab.save(&output)?;
    log::info!(
        "built vocabulary of {} token(s) from {} training record(s)",
        vocab.size(),
        train.len()
    );

    let mut m = Manifest::new("dataset build-vocab");
    m.push("input", input.display());
    m.push("output", output.display());
    m.push("include_rows", include_rows);
    m.push("include_prefix_suffix", include_prefix_suffix);
    m.push("max_tokens", max_tokens);
    m.push("vocab_size", vocab.size());
    m.push_digest("dataset", &input)?;
    m.write(&manifest_path_for(&output))?;
    Ok(())
}

// ------------------------------------------------------------------- encode

#[derive(Debug, clap::Args)]
pub struct EncodeArgs {
    /// Split dataset file.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Vocabulary file.
    #[arg(long, value_name = "FILE")]
    vocab: Option<PathBuf>,
    /// Encoded output file (one JSON object per record).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Only encode records with this split label.
    #[arg(long, value_name = "train|validation|test")]
    split: Option<String>,
    #[command(flatten)]
    fields: FieldFlags,
    /// Source length cap.
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
}

#[derive(Serialize)]
struct EncodedLine<'a> {
    source_ids: &'a [usize],
    source_extended_ids: &'a [usize],
    oov_tokens: &'a [String],
    target_ids: &'a [usize],
}

pub fn parse_split(name: &str) -> Result<Split> {
    Split::parse(name)
        .ok_or_else(|| CliError::Config(format!("unknown split {name:?} (train|validation|test)")))
}

fn run_encode(args: &EncodeArgs, cfg: &ConfigFile) -> Result<()> {
    let input: PathBuf = cfg.resolve_required(&args.input, "input")?;
    let vocab_path: PathBuf = cfg.resolve_required(&args.vocab, "vocab")?;
    let output: PathBuf = cfg.resolve_required(&args.output, "output")?;
    let split = cfg.resolve_optional(&args.split, "split")?;
    let (include_rows, include_prefix_suffix) = args.fields.resolve(cfg)?;
    let max_tokens = cfg.resolve(&args.max_tokens, "max_tokens", 150)?;
    let config = field_config(include_rows, include_prefix_suffix, max_tokens);

    let wanted = split.as_deref().map(parse_split).transpose()?;
    let vocab = Vocabulary::load(&vocab_path)?;
    let records = read_records(&input)?;

    let mut out = BufWriter::new(File::create(&output)?);
    let mut n = 0usize;
    for record in &records {
        if wanted.is_some() && record.split != wanted {
            continue;
        }
        let example = encode_example(record, &vocab, &config);
        let line = serde_json::to_string(&EncodedLine {
            source_ids: &example.source_ids,
            source_extended_ids: &example.source_extended_ids,
            oov_tokens: &example.oov_tokens,
            target_ids: &example.target_ids,
        })?;
        writeln!(out, "{line}")?;
        n += 1;
    }
    out.flush()?;
    log::info!("encoded {} record(s) into {}", n, output.display());

    let mut m = Manifest::new("dataset encode");
    m.push("input", input.display());
    m.push("vocab", vocab_path.display());
    m.push("output", output.display());
    m.push("split", split.unwrap_or_default());
    m.push("include_rows", include_rows);
    m.push("include_prefix_suffix", include_prefix_suffix);
    m.push("max_tokens", max_tokens);
    m.push_digest("dataset", &input)?;
    m.push_digest("vocab", &vocab_path)?;
    m.write(&manifest_path_for(&output))?;
    Ok(())
}

/// Shared helper: load records and encode the requested split with `vocab`.
pub fn load_encoded(
    dataset: &Path,
    vocab: &Vocabulary,
    split: Split,
    config: &tabletitle::corpus::FieldConfig,
) -> Result<Vec<tabletitle::corpus::EncodedExample>> {
    let records = read_records(dataset)?;
    Ok(records
        .iter()
        .filter(|r| r.split == Some(split))
        .map(|r| encode_example(r, vocab, config))
        .collect())
}
