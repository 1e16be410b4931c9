//! Config-file loading, flag/file precedence, and run manifests.
//!
//! A config file is flat `key = value` text; command-line flags override
//! file entries, which override built-in defaults. Every run writes a
//! manifest recording the effective value of every setting plus SHA-256
//! digests of the inputs, so two runs are comparable key by key.

use crate::error::{CliError, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Toolkit version plus the checkpoint container version it writes.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (checkpoint format 1)");

// Keep the hand-written version string honest.
const _: () = assert!(tabletitle::model::CHECKPOINT_VERSION == 1);

/// Parsed `key = value` config file. Missing file path means no overrides.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                Self::parse(&text).map_err(|msg| {
                    CliError::Config(format!("{}: {msg}", p.display()))
                })
            }
        }
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`, got {line:?}", i + 1))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(format!("line {}: empty key", i + 1));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed config entry, else the default.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        key: &str,
        default: T,
    ) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Config(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }

    /// Like [`ConfigFile::resolve`] but the setting is required.
    pub fn resolve_required<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        key: &str,
    ) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        match self.get(key) {
            None => Err(CliError::Config(format!(
                "missing required setting {key} (flag --{} or config entry)",
                key.replace('_', "-")
            ))),
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Config(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }

    /// An optional setting with no default: flag if given, else the config
    /// entry if present, else `None`.
    pub fn resolve_optional<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        key: &str,
    ) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag.clone());
        }
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }

    /// A switch flag: true on the command line wins, else the config entry.
    pub fn resolve_switch(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        self.resolve(&None, key, false)
    }
}

/// Ordered `key = value` run record written next to a command's outputs.
#[derive(Debug)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest { entries: Vec::new() };
        m.push("command", command);
        m.push("toolkit_version", env!("CARGO_PKG_VERSION"));
        m.push("checkpoint_format_version", tabletitle::model::CHECKPOINT_VERSION);
        m
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Records `input.<label> = sha256:<hex>` for one input file.
    pub fn push_digest(&mut self, label: &str, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        let hex = hex_digest(&bytes);
        self.push(&format!("input.{label}"), format!("sha256:{hex}"));
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

/// The manifest file written next to a file output: `<output>.manifest`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest");
    output.with_file_name(name)
}
