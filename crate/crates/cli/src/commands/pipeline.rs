//! `pipeline`: extract → aggregate → split → vocab → train → generate →
//! evaluate, end to end in one working directory.

use crate::commands::dataset::{aggregate_records, training_subset};
use crate::commands::evaluate::evaluate_files;
use crate::commands::extract::{extract_records, ExtractSettings};
use crate::commands::generate::parse_mode;
use crate::commands::train::{manifest_hyper, train_model, HyperFlags};
use crate::commands::{field_config, worker_pool, FieldFlags};
use crate::config::{ConfigFile, Manifest};
use crate::error::Result;
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use tabletitle::corpus::{
    build_vocab, split_dataset, write_records, DatasetRecord, Split, Vocabulary,
};
use tabletitle::decode::{generate, DecodeMode, DecodeOptions};
use tabletitle::model::ModelParams;

#[derive(Debug, clap::Args)]
pub struct PipelineArgs {
    /// HTML file or directory of .html files.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Directory that receives every artifact of the run.
    #[arg(long, value_name = "DIR")]
    workdir: Option<PathBuf>,
    /// Page manifest; defaults to manifest.json inside the input directory.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperFlags,
    #[command(flatten)]
    fields: FieldFlags,
    /// Beam width for the generation stage.
    #[arg(long, value_name = "N")]
    beam: Option<usize>,
    /// Minimum generated title length.
    #[arg(long, value_name = "N")]
    min_len: Option<usize>,
    /// Maximum generated title length.
    #[arg(long, value_name = "N")]
    max_len: Option<usize>,
    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

const MODEL_MODES: [DecodeMode; 3] = [
    DecodeMode::CopyGenerate,
    DecodeMode::CopyOnly,
    DecodeMode::GenerateOnly,
];

pub fn run(args: &PipelineArgs, cfg: &ConfigFile) -> Result<()> {
    let input: PathBuf = cfg.resolve_required(&args.input, "input")?;
    let workdir: PathBuf = cfg.resolve_required(&args.workdir, "workdir")?;
    let hyper = args.hyper.resolve(cfg)?;
    let (include_rows, include_prefix_suffix) = args.fields.resolve(cfg)?;
    let config = field_config(include_rows, include_prefix_suffix, hyper.max_source_len);
    let defaults = DecodeOptions::default();
    let opts = DecodeOptions {
        beam_size: cfg.resolve(&args.beam, "beam", defaults.beam_size)?,
        min_len: cfg.resolve(&args.min_len, "min_len", defaults.min_len)?,
        max_len: cfg.resolve(&args.max_len, "max_len", defaults.max_len)?,
        mode: parse_mode(&cfg.resolve(&None, "mode", "copy_generate".to_string())?)?,
        ..defaults
    };
    let jobs = cfg.resolve(&args.jobs, "jobs", 0)?;
    fs::create_dir_all(&workdir)?;

    // Stage 1: extract every table of every page.
    let extract_settings = ExtractSettings {
        input: input.clone(),
        output: workdir.join("extracted.jsonl"),
        manifest: match cfg.resolve_optional(&args.manifest, "manifest")? {
            Some(p) => Some(p),
            None => {
                let default = input.join("manifest.json");
                default.is_file().then_some(default)
            }
        },
        include_rows,
        include_prefix_suffix,
        jobs,
    };
    let (files, records) = extract_records(&extract_settings)?;
    write_records(&extract_settings.output, &records)?;
    log::info!("pipeline: extracted {} record(s)", records.len());

    // Stage 2: accept one title per record.
    let total = records.len();
    let (mut records, drops) = aggregate_records(records, &config);
    if drops.total() > 0 {
        log::warn!("pipeline: dropped {} of {} record(s)", drops.total(), total);
    }
    write_records(&workdir.join("aggregated.jsonl"), &records)?;

    // Stage 3: split.
    let counts = split_dataset(&mut records, hyper.seed)?;
    let dataset_path = workdir.join("dataset.jsonl");
    write_records(&dataset_path, &records)?;
    log::info!(
        "pipeline: split into {} train / {} validation / {} test",
        counts.train,
        counts.validation,
        counts.test
    );

    // Stage 4: vocabulary from the training split only.
    let vocab = build_vocab(&training_subset(&records)?, &config)?;
    let vocab_path = workdir.join("vocab.txt");
    vocab.save(&vocab_path)?;
    log::info!("pipeline: vocabulary of {} token(s)", vocab.size());

    // Stage 5: train and checkpoint.
    let outcome = train_model(
        &dataset_path,
        &vocab,
        &workdir,
        &hyper,
        include_rows,
        include_prefix_suffix,
    )?;

    // Stage 6: decode the test split in all three modes, next to the
    // selection baselines and references.
    let test: Vec<&DatasetRecord> = records
        .iter()
        .filter(|r| r.split == Some(Split::Test))
        .collect();
    let predictions_dir = workdir.join("predictions");
    fs::create_dir_all(&predictions_dir)?;
    let mut prediction_files = Vec::new();
    for mode in MODEL_MODES {
        let path = predictions_dir.join(format!("{mode}.jsonl"));
        decode_records(&outcome.params, &vocab, &test, &config, &opts, mode, jobs, &path)?;
        prediction_files.push(path);
    }
    for (name, pick) in BASELINES {
        let path = predictions_dir.join(format!("{name}.txt"));
        let lines: Vec<String> = test.iter().map(|r| pick(r)).collect();
        fs::write(&path, join_lines(&lines))?;
        prediction_files.push(path);
    }
    let references_path = workdir.join("references.txt");
    let references: Vec<String> = test.iter().map(|r| r.title.clone()).collect();
    fs::write(&references_path, join_lines(&references))?;

    // Stage 7: score everything.
    let report = evaluate_files(&prediction_files, &references_path, jobs)?;
    fs::write(workdir.join("report.tsv"), report.to_tsv())?;
    for line in report.render().lines() {
        log::info!("{line}");
    }

    let mut m = Manifest::new("pipeline");
    m.push("input", input.display());
    m.push("workdir", workdir.display());
    m.push(
        "manifest",
        extract_settings
            .manifest
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default(),
    );
    m.push("include_rows", include_rows);
    m.push("include_prefix_suffix", include_prefix_suffix);
    manifest_hyper(&mut m, &hyper);
    m.push("beam", opts.beam_size);
    m.push("min_len", opts.min_len);
    m.push("max_len", opts.max_len);
    m.push("jobs", jobs);
    m.push("records", total);
    m.push("dropped", drops.total());
    m.push("vocab_size", vocab.size());
    m.push("train_steps", outcome.steps);
    for f in &files {
        let label = f.strip_prefix(&input).unwrap_or(f).display().to_string();
        m.push_digest(&label, f)?;
    }
    if let Some(p) = &extract_settings.manifest {
        m.push_digest("manifest.json", p)?;
    }
    m.write(&workdir.join("run.manifest"))?;
    log::info!("pipeline: artifacts in {}", workdir.display());
    Ok(())
}

type Pick = fn(&DatasetRecord) -> String;

/// Selection baselines: existing page text reused verbatim as the title.
const BASELINES: [(&str, Pick); 2] = [
    ("page_title", |r| r.context.page_title.join(" ")),
    // Nearest enclosing section heading (the last in reading order).
    ("section_heading", |r| {
        r.context
            .section_headings
            .last()
            .map(|(_, tokens)| tokens.join(" "))
            .unwrap_or_default()
    }),
];

#[derive(Serialize)]
struct PredictionLine<'a> {
    table_index: usize,
    title: &'a str,
    score: f64,
    mode: &'a str,
}

#[allow(clippy::too_many_arguments)]
fn decode_records(
    params: &ModelParams<f32>,
    vocab: &Vocabulary,
    test: &[&DatasetRecord],
    config: &tabletitle::corpus::FieldConfig,
    opts: &DecodeOptions,
    mode: DecodeMode,
    jobs: usize,
    path: &Path,
) -> Result<()> {
    let opts = DecodeOptions { mode, ..*opts };
    let pool = worker_pool(jobs)?;
    let generated: Vec<_> = pool.install(|| {
        test.par_iter()
            .map(|r| generate(params, vocab, &r.context, config, &opts))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    let mut out = fs::File::create(path).map(std::io::BufWriter::new)?;
    for (record, g) in test.iter().zip(&generated) {
        let line = serde_json::to_string(&PredictionLine {
            table_index: record.context.table_index,
            title: &g.title,
            score: g.score,
            mode: mode.as_str(),
        })?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn join_lines(lines: &[String]) -> String {
    let mut text = String::new();
    for line in lines {
        text.push_str(line);
        text.push('\n');
    }
    text
}
