//! `generate`: decode titles for tables from a dataset file or an HTML page.

use crate::commands::{field_config, worker_pool, FieldFlags};
use crate::config::{manifest_path_for, ConfigFile, Manifest};
use crate::error::{CliError, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use tabletitle::corpus::{read_records, Vocabulary};
use tabletitle::decode::{generate, DecodeMode, DecodeOptions};
use tabletitle::extract::{extract_context, DocumentTree, TableContext};
use tabletitle::model::load_checkpoint;

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    /// Trained checkpoint file.
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// Vocabulary the checkpoint was trained with.
    #[arg(long, value_name = "FILE")]
    vocab: Option<PathBuf>,
    /// Dataset file or .html page.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output file (one JSON object per table).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// copy_generate, copy_only, or generate_only.
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    /// Beam width.
    #[arg(long, value_name = "N")]
    beam: Option<usize>,
    /// Minimum title length in tokens.
    #[arg(long, value_name = "N")]
    min_len: Option<usize>,
    /// Maximum title length in tokens.
    #[arg(long, value_name = "N")]
    max_len: Option<usize>,
    /// Render copied out-of-vocabulary tokens as __token__.
    #[arg(long)]
    debug_oov: bool,
    /// Leave the masked distribution unrescaled.
    #[arg(long)]
    no_renormalize: bool,
    /// Disable the no-repeat mask (ablation).
    #[arg(long)]
    allow_repeats: bool,
    /// Only decode dataset records with this split label.
    #[arg(long, value_name = "train|validation|test")]
    split: Option<String>,
    #[command(flatten)]
    fields: FieldFlags,
    /// Source length cap; defaults to the checkpoint's max_source_len.
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Serialize)]
struct GeneratedLine<'a> {
    table_index: usize,
    title: &'a str,
    score: f64,
    mode: &'a str,
}

pub fn parse_mode(name: &str) -> Result<DecodeMode> {
    DecodeMode::parse(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown mode {name:?} (copy_generate|copy_only|generate_only)"
        ))
    })
}

pub fn run(args: &GenerateArgs, cfg: &ConfigFile) -> Result<()> {
    let checkpoint: PathBuf = cfg.resolve_required(&args.checkpoint, "checkpoint")?;
    let vocab_path: PathBuf = cfg.resolve_required(&args.vocab, "vocab")?;
    let input: PathBuf = cfg.resolve_required(&args.input, "input")?;
    let output: PathBuf = cfg.resolve_required(&args.output, "output")?;
    let mode_name: String = cfg.resolve(&args.mode, "mode", "copy_generate".to_string())?;
    let mode = parse_mode(&mode_name)?;
    let defaults = DecodeOptions::default();
    let opts = DecodeOptions {
        beam_size: cfg.resolve(&args.beam, "beam", defaults.beam_size)?,
        min_len: cfg.resolve(&args.min_len, "min_len", defaults.min_len)?,
        max_len: cfg.resolve(&args.max_len, "max_len", defaults.max_len)?,
        mode,
        block_repeats: !cfg.resolve_switch(args.allow_repeats, "allow_repeats")?,
        renormalize: !cfg.resolve_switch(args.no_renormalize, "no_renormalize")?,
        debug_oov: cfg.resolve_switch(args.debug_oov, "debug_oov")?,
        ..defaults
    };
    let split = cfg.resolve_optional(&args.split, "split")?;
    let wanted = split
        .as_deref()
        .map(super::dataset::parse_split)
        .transpose()?;
    let (include_rows, include_prefix_suffix) = args.fields.resolve(cfg)?;
    let jobs = cfg.resolve(&args.jobs, "jobs", 0)?;

    let (hyper, params) = load_checkpoint(&checkpoint)?;
    let vocab = Vocabulary::load(&vocab_path)?;
    if vocab.size() != params.vocab_size {
        return Err(CliError::Config(format!(
            "vocabulary has {} tokens but the checkpoint was trained with {}",
            vocab.size(),
            params.vocab_size
        )));
    }
    let max_tokens = cfg.resolve(&args.max_tokens, "max_tokens", hyper.max_source_len)?;
    let config = field_config(include_rows, include_prefix_suffix, max_tokens);

    let contexts = load_contexts(&input, wanted)?;
    let pool = worker_pool(jobs)?;
    let generated: Vec<_> = pool.install(|| {
        contexts
            .par_iter()
            .map(|ctx| generate(&params, &vocab, ctx, &config, &opts))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;

    let mut out = fs::File::create(&output).map(std::io::BufWriter::new)?;
    for (ctx, g) in contexts.iter().zip(&generated) {
        let line = serde_json::to_string(&GeneratedLine {
            table_index: ctx.table_index,
            title: &g.title,
            score: g.score,
            mode: mode.as_str(),
        })?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    log::info!(
        "generated {} title(s) in {} mode into {}",
        generated.len(),
        mode,
        output.display()
    );

    let mut m = Manifest::new("generate");
    m.push("checkpoint", checkpoint.display());
    m.push("vocab", vocab_path.display());
    m.push("input", input.display());
    m.push("output", output.display());
    m.push("mode", mode);
    m.push("beam", opts.beam_size);
    m.push("min_len", opts.min_len);
    m.push("max_len", opts.max_len);
    m.push("debug_oov", opts.debug_oov);
    m.push("no_renormalize", !opts.renormalize);
    m.push("allow_repeats", !opts.block_repeats);
    m.push("split", split.unwrap_or_default());
    m.push("include_rows", include_rows);
    m.push("include_prefix_suffix", include_prefix_suffix);
    m.push("max_tokens", max_tokens);
    m.push("jobs", jobs);
    m.push_digest("checkpoint", &checkpoint)?;
    m.push_digest("vocab", &vocab_path)?;
    m.push_digest("input", &input)?;
    m.write(&manifest_path_for(&output))?;
    Ok(())
}

/// Reads decode inputs: every table of an HTML page, or the (optionally
/// split-filtered) records of a dataset file.
fn load_contexts(
    input: &PathBuf,
    wanted: Option<tabletitle::corpus::Split>,
) -> Result<Vec<TableContext>> {
    let is_html = matches!(
        input.extension().and_then(|e| e.to_str()),
        Some("html" | "htm")
    );
    if is_html {
        let doc = DocumentTree::parse(&fs::read_to_string(input)?)?;
        return (0..doc.table_count())
            .map(|i| extract_context(&doc, i).map_err(CliError::from))
            .collect();
    }
    Ok(read_records(input)?
        .into_iter()
        .filter(|r| wanted.is_none() || r.split == wanted)
        .map(|r| r.context)
        .collect())
}
