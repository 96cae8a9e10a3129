//! Command implementations shared by the CLI binary and the test suites.
//!
//! Every command validates the configuration, writes its tables under the
//! output directory, and records each table in the archive keyed by the
//! config hash. Stage failures surface as errors naming the stage.

mod analysis;
mod braille;
mod data;
mod protocols;

pub use analysis::{cmd_classify, cmd_robustness, ClassifierChoice, ModeChoice};
pub use braille::cmd_braille;
pub use data::{cmd_encode, cmd_features, cmd_sim, cmd_synth};
pub use protocols::{cmd_spatial, cmd_sweep, cmd_temporal};

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use crate::archive::ResultArchive;
use crate::config::{validate_config, ExperimentConfig};

/// Shared state of one command invocation.
pub struct Workspace {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub archive: ResultArchive,
}

impl Workspace {
    pub fn new(config: ExperimentConfig, out_dir: &Path) -> anyhow::Result<Self> {
        let diagnostics = validate_config(&config);
        if !diagnostics.is_empty() {
            let listing: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
            bail!("invalid config:\n  {}", listing.join("\n  "));
        }
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
        let archive = ResultArchive::open(out_dir, config.hash())?;
        // Persist the exact config alongside the results so any run can be
        // reproduced from its output directory alone.
        config.save(&out_dir.join("config.json"))?;
        Ok(Self {
            config,
            out_dir: out_dir.to_path_buf(),
            archive,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn record(&self, stage: &str, path: &Path) -> anyhow::Result<()> {
        self.archive
            .record(stage, path)
            .with_context(|| format!("archiving {} for stage {stage}", path.display()))
    }

    /// Wraps a stage result with the stage name and config hash, matching the
    /// CLI's error contract.
    pub fn stage<T, E: std::error::Error + Send + Sync + 'static>(
        &self,
        stage: &str,
        result: Result<T, E>,
    ) -> anyhow::Result<T> {
        result.with_context(|| format!("stage {stage} failed (config {})", self.config.hash()))
    }
}

/// Parses a letter set: `A..Z`, `A-Z`, `ABC`, or `A,B,C`.
pub fn parse_letters(text: &str) -> anyhow::Result<Vec<char>> {
    let text = text.trim();
    let range = text
        .split_once("..")
        .or_else(|| text.split_once('-'))
        .map(|(a, b)| (a.trim(), b.trim()));
    if let Some((start, end)) = range {
        let (s, e) = (single_letter(start)?, single_letter(end)?);
        if e < s {
            bail!("letter range {text:?} runs backwards");
        }
        return Ok((s..=e).collect());
    }
    let letters: Vec<char> = if text.contains(',') {
        text.split(',')
            .map(|part| single_letter(part.trim()))
            .collect::<anyhow::Result<_>>()?
    } else {
        text.chars()
            .map(|c| single_letter(&c.to_string()))
            .collect::<anyhow::Result<_>>()?
    };
    if letters.is_empty() {
        bail!("empty letter list");
    }
    Ok(letters)
}

fn single_letter(text: &str) -> anyhow::Result<char> {
    let mut chars = text.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_alphabetic() => Ok(c.to_ascii_uppercase()),
        _ => bail!("{text:?} is not a letter"),
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_values(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad numeric value {v:?}"))
        })
        .collect()
}
