//! `extract`: harvest one dataset record per table from HTML pages.

use crate::commands::{worker_pool, FieldFlags};
use crate::config::{manifest_path_for, ConfigFile, Manifest};
use crate::error::{CliError, Result};
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use tabletitle::corpus::{write_records, DatasetRecord};
use tabletitle::extract::{extract_context, DocumentTree};
use walkdir::WalkDir;

#[derive(Debug, clap::Args)]
pub struct ExtractArgs {
    /// HTML file or directory of .html files.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output dataset file (one JSON record per table).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// JSON file mapping page file names to source URL and per-table
    /// candidate titles. Defaults to `manifest.json` inside the input
    /// directory when present.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldFlags,
    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Debug)]
pub struct ExtractSettings {
    pub input: PathBuf,
    pub output: PathBuf,
    pub manifest: Option<PathBuf>,
    pub include_rows: bool,
    pub include_prefix_suffix: bool,
    pub jobs: usize,
}

/// Per-page annotations: where the page came from and what human annotators
/// proposed as titles, indexed by table position.
#[derive(Debug, Default, Deserialize)]
pub struct PageMeta {
    #[serde(default)]
    pub source_url: Option<String>,
    #[serde(default)]
    pub candidate_titles: Vec<Vec<String>>,
}

impl ExtractArgs {
    pub fn settings(&self, cfg: &ConfigFile) -> Result<ExtractSettings> {
        let input: PathBuf = cfg.resolve_required(&self.input, "input")?;
        let (include_rows, include_prefix_suffix) = self.fields.resolve(cfg)?;
        let manifest = match cfg.resolve_optional(&self.manifest, "manifest")? {
            Some(p) => Some(p),
            None => {
                let default = input.join("manifest.json");
                input.is_dir().then_some(default).filter(|p| p.is_file())
            }
        };
        Ok(ExtractSettings {
            output: cfg.resolve_required(&self.output, "output")?,
            manifest,
            include_rows,
            include_prefix_suffix,
            jobs: cfg.resolve(&self.jobs, "jobs", 0)?,
            input,
        })
    }
}

pub fn run(args: &ExtractArgs, cfg: &ConfigFile) -> Result<()> {
    let s = args.settings(cfg)?;
    let (files, records) = extract_records(&s)?;
    write_records(&s.output, &records)?;
    log::info!(
        "extracted {} record(s) from {} page file(s) into {}",
        records.len(),
        files.len(),
        s.output.display()
    );

    let mut m = Manifest::new("extract");
    manifest_entries(&mut m, &s, &files)?;
    m.write(&manifest_path_for(&s.output))?;
    Ok(())
}

pub fn manifest_entries(m: &mut Manifest, s: &ExtractSettings, files: &[PathBuf]) -> Result<()> {
    m.push("input", s.input.display());
    m.push("output", s.output.display());
    m.push(
        "manifest",
        s.manifest.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
    );
    m.push("include_rows", s.include_rows);
    m.push("include_prefix_suffix", s.include_prefix_suffix);
    m.push("jobs", s.jobs);
    for f in files {
        m.push_digest(&label_for(&s.input, f), f)?;
    }
    if let Some(p) = &s.manifest {
        m.push_digest(&label_for(&s.input, p), p)?;
    }
    Ok(())
}

fn label_for(input: &Path, file: &Path) -> String {
    file.strip_prefix(input)
        .unwrap_or(file)
        .display()
        .to_string()
}

/// Discovers the page files and extracts every table's record, in file order.
pub fn extract_records(s: &ExtractSettings) -> Result<(Vec<PathBuf>, Vec<DatasetRecord>)> {
    let files = discover(&s.input)?;
    let meta = match &s.manifest {
        None => BTreeMap::new(),
        Some(p) => load_page_manifest(p)?,
    };

    let pool = worker_pool(s.jobs)?;
    let per_file: Vec<Result<Vec<DatasetRecord>>> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                let name = f.file_name().and_then(|n| n.to_str()).unwrap_or_default();
                extract_file(f, meta.get(name), s.include_rows, s.include_prefix_suffix)
            })
            .collect()
    });

    let mut records = Vec::new();
    for result in per_file {
        records.extend(result?);
    }
    Ok((files, records))
}

fn discover(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(input).sort_by_file_name() {
        let entry =
            entry.map_err(|e| CliError::Config(format!("walking {}: {e}", input.display())))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        if matches!(path.extension().and_then(|e| e.to_str()), Some("html" | "htm")) {
            files.push(path.to_path_buf());
        }
    }
    if files.is_empty() {
        return Err(CliError::Config(format!(
            "no .html files under {}",
            input.display()
        )));
    }
    Ok(files)
}

pub fn load_page_manifest(path: &Path) -> Result<BTreeMap<String, PageMeta>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn extract_file(
    path: &Path,
    meta: Option<&PageMeta>,
    include_rows: bool,
    include_prefix_suffix: bool,
) -> Result<Vec<DatasetRecord>> {
    let html = fs::read_to_string(path)?;
    let doc = DocumentTree::parse(&html)?;
    let mut records = Vec::with_capacity(doc.table_count());
    for index in 0..doc.table_count() {
        let mut context = extract_context(&doc, index)?;
        if !include_rows {
            context.table_rows.clear();
        }
        if !include_prefix_suffix {
            context.prefix_text.clear();
            context.suffix_text.clear();
        }
        context.source_url = meta.and_then(|m| m.source_url.clone());
        let candidate_titles = meta
            .and_then(|m| m.candidate_titles.get(index).cloned())
            .unwrap_or_default();
        records.push(DatasetRecord {
            context,
            candidate_titles,
            title: String::new(),
            title_verbatim: false,
            split: None,
        });
    }
    Ok(records)
}
