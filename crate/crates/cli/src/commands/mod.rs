//! Subcommand implementations.

pub mod dataset;
pub mod evaluate;
pub mod extract;
pub mod generate;
pub mod pipeline;
pub mod train;

use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use tabletitle::corpus::FieldConfig;

/// Linearization field switches shared by several commands.
#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct FieldFlags {
    /// Include table rows in the linearized source.
    #[arg(long)]
    pub include_rows: bool,
    /// Include the prefix/suffix running text in the linearized source.
    #[arg(long)]
    pub include_prefix_suffix: bool,
}

impl FieldFlags {
    /// Effective `(include_rows, include_prefix_suffix)` after the config file.
    pub fn resolve(&self, cfg: &ConfigFile) -> Result<(bool, bool)> {
        Ok((
            cfg.resolve_switch(self.include_rows, "include_rows")?,
            cfg.resolve_switch(self.include_prefix_suffix, "include_prefix_suffix")?,
        ))
    }
}

/// Default field set plus the optional bulky fields and a token cap.
pub fn field_config(include_rows: bool, include_prefix_suffix: bool, max_tokens: usize) -> FieldConfig {
    FieldConfig {
        table_rows: include_rows,
        prefix_suffix: include_prefix_suffix,
        max_tokens,
        ..FieldConfig::default()
    }
}

/// A rayon pool with `jobs` workers (0 = one per core).
pub fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))
}
