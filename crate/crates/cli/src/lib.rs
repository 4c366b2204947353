//! Batch runner behind the `ornlab` binary.
//!
//! Every subcommand reads one JSON config, computes a set of output files and a
//! list of checks, and never touches the filesystem itself except to read inputs
//! named by the config. [`Outcome::write_to`] persists the files.

pub mod build;
pub mod curves;
pub mod load;
pub mod montecarlo;
pub mod tails;
pub mod verify;

mod report;

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use report::{Exact, Verdict};

pub const TOOL: &str = "ornlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Build,
    Load,
    Montecarlo,
    Tails,
    Curves,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Load => "load",
            Command::Montecarlo => "montecarlo",
            Command::Tails => "tails",
            Command::Curves => "curves",
            Command::Verify => "verify",
        }
    }
}

/// Provenance stamped into every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_digest: String,
    pub seed: u64,
}

impl Meta {
    /// Leading comment line for CSV and text outputs.
    pub fn comment(&self) -> String {
        format!(
            "# tool={} version={} command={} config_digest={} seed={}\n",
            self.tool, self.version, self.command, self.config_digest, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", Verdict::from(self.passed), self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub files: Vec<OutputFile>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<std::path::PathBuf>> {
        fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|f| {
                let path = dir.join(&f.name);
                fs::write(&path, &f.contents)?;
                Ok(path)
            })
            .collect()
    }

    fn add_json(&mut self, name: &str, value: &impl Serialize) {
        let mut contents = serde_json::to_string_pretty(value).expect("output records serialize");
        contents.push('\n');
        self.files.push(OutputFile { name: name.into(), contents });
    }

    fn add_text(&mut self, name: &str, contents: String) {
        self.files.push(OutputFile { name: name.into(), contents });
    }
}

/// Configs carry their own seed so it lands in the digest and every output.
pub trait CommandConfig: Serialize + DeserializeOwned {
    fn seed_mut(&mut self) -> &mut u64;
}

/// Parses `text` (or `{}` when absent), applies a seed override and stamps the
/// digest of the effective config.
pub fn prepare<C: CommandConfig>(command: Command, text: Option<&str>, seed: Option<u64>) -> anyhow::Result<(C, Meta)> {
    let mut cfg: C = serde_json::from_str(text.unwrap_or("{}"))
        .with_context(|| format!("invalid {} config", command.name()))?;
    if let Some(s) = seed {
        *cfg.seed_mut() = s;
    }
    let canonical = serde_json::to_string(&cfg).expect("configs serialize");
    let meta = Meta {
        tool: TOOL,
        version: VERSION,
        command: command.name(),
        config_digest: sha256_hex(canonical.as_bytes()),
        seed: *cfg.seed_mut(),
    };
    Ok((cfg, meta))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one subcommand. Relative paths inside the config resolve against `base_dir`.
pub fn run(command: Command, config: Option<&str>, base_dir: &Path, seed: Option<u64>) -> anyhow::Result<Outcome> {
    match command {
        Command::Build => {
            let (cfg, meta) = prepare(command, config, seed)?;
            build::run(&cfg, &meta)
        }
        Command::Load => {
            let (cfg, meta) = prepare(command, config, seed)?;
            load::run(&cfg, &meta, base_dir)
        }
        Command::Montecarlo => {
            let (cfg, meta) = prepare(command, config, seed)?;
            montecarlo::run(&cfg, &meta, base_dir)
        }
        Command::Tails => {
            let (cfg, meta) = prepare(command, config, seed)?;
            tails::run(&cfg, &meta, base_dir)
        }
        Command::Curves => {
            let (cfg, meta) = prepare(command, config, seed)?;
            curves::run(&cfg, &meta)
        }
        Command::Verify => {
            let (cfg, meta) = prepare(command, config, seed)?;
            verify::run(&cfg, &meta)
        }
    }
}

pub(crate) fn resolve(base: &Path, path: &Path) -> std::path::PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
