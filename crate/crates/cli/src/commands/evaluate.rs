//! `evaluate`: score prediction files against shared references.

use crate::commands::worker_pool;
use crate::config::{manifest_path_for, ConfigFile, Manifest};
use crate::error::{CliError, Result};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use tabletitle::eval::{evaluate, EvalReport};

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    /// Prediction files, one title per line; the file stem names the system.
    #[arg(long, value_name = "FILES", num_args = 1.., required = false)]
    predictions: Vec<PathBuf>,
    /// Reference titles, aligned line by line with every prediction file.
    #[arg(long, value_name = "FILE")]
    references: Option<PathBuf>,
    /// Report output (TSV).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

pub fn run(args: &EvaluateArgs, cfg: &ConfigFile) -> Result<()> {
    let predictions: Vec<PathBuf> = if args.predictions.is_empty() {
        cfg.resolve_required::<String>(&None, "predictions")?
            .split_whitespace()
            .map(PathBuf::from)
            .collect()
    } else {
        args.predictions.clone()
    };
    let references: PathBuf = cfg.resolve_required(&args.references, "references")?;
    let out: PathBuf = cfg.resolve_required(&args.out, "out")?;
    let jobs = cfg.resolve(&args.jobs, "jobs", 0)?;

    let report = evaluate_files(&predictions, &references, jobs)?;
    fs::write(&out, report.to_tsv())?;
    for line in report.render().lines() {
        log::info!("{line}");
    }
    log::info!("wrote report for {} system(s) to {}", report.systems.len(), out.display());

    let mut m = Manifest::new("evaluate");
    m.push(
        "predictions",
        predictions
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    m.push("references", references.display());
    m.push("out", out.display());
    m.push("jobs", jobs);
    for p in &predictions {
        m.push_digest(&system_name(p)?, p)?;
    }
    m.push_digest("references", &references)?;
    m.write(&manifest_path_for(&out))?;
    Ok(())
}

/// Scores each prediction file against the references, in parallel per
/// system, keeping the given file order in the report.
pub fn evaluate_files(predictions: &[PathBuf], references: &Path, jobs: usize) -> Result<EvalReport> {
    if predictions.is_empty() {
        return Err(CliError::Config("no prediction files given".into()));
    }
    let mut names = BTreeSet::new();
    let mut systems: Vec<(String, Vec<String>)> = Vec::with_capacity(predictions.len());
    for path in predictions {
        let name = system_name(path)?;
        if !names.insert(name.clone()) {
            return Err(CliError::Config(format!(
                "two prediction files share the system name {name:?}"
            )));
        }
        systems.push((name, read_titles(path)?));
    }
    let reference_titles = read_titles(references)?;

    let pool = worker_pool(jobs)?;
    let per_system: Vec<EvalReport> = pool.install(|| {
        systems
            .par_iter()
            .map(|sys| evaluate(std::slice::from_ref(sys), &reference_titles))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    Ok(EvalReport {
        systems: per_system.into_iter().flat_map(|r| r.systems).collect(),
    })
}

fn system_name(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::Config(format!("cannot name a system after {}", path.display())))
}

/// Reads one title per line. A line that is a JSON object contributes its
/// "title" field, so generation output files work directly; anything else
/// is taken verbatim.
pub fn read_titles(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    let mut titles = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match serde_json::from_str::<serde_json::Value>(line) {
            Ok(serde_json::Value::Object(map)) => match map.get("title").and_then(|t| t.as_str()) {
                Some(title) => titles.push(title.to_string()),
                None => {
                    return Err(CliError::Config(format!(
                        "{}:{}: JSON object without a \"title\" string",
                        path.display(),
                        i + 1
                    )))
                }
            },
            _ => titles.push(line.to_string()),
        }
    }
    Ok(titles)
}
