//! Append-only result archive.
//!
//! Every emitted table is recorded in `archive.jsonl` with the config hash
//! that produced it, the stage name, its own content hash, and a timestamp.
//! Table files themselves never contain timestamps, so re-running a config
//! reproduces them byte-for-byte; only the archive index carries wall-clock
//! information.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveRecord {
    pub config_hash: String,
    pub stage: String,
    pub payload: String,
    pub sha256: String,
    pub timestamp_unix: u64,
}

/// Writer handle for one output directory.
pub struct ResultArchive {
    dir: PathBuf,
    config_hash: String,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl ResultArchive {
    pub fn open(dir: &Path, config_hash: String) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_hash,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn index_path(&self) -> PathBuf {
        self.dir.join("archive.jsonl")
    }

    /// Records one payload file (relative to the archive directory).
    pub fn record(&self, stage: &str, payload: &Path) -> anyhow::Result<()> {
        let sha256 = sha256_file(payload)?;
        let rel = payload
            .strip_prefix(&self.dir)
            .unwrap_or(payload)
            .to_string_lossy()
            .into_owned();
        let record = ArchiveRecord {
            config_hash: self.config_hash.clone(),
            stage: stage.to_string(),
            payload: rel,
            sha256,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.index_path())?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer(&mut writer, &record)?;
        writeln!(writer)?;
        Ok(())
    }

    pub fn read_index(dir: &Path) -> anyhow::Result<Vec<ArchiveRecord>> {
        let text = std::fs::read_to_string(dir.join("archive.jsonl"))?;
        text.lines()
            .map(|l| Ok(serde_json::from_str(l)?))
            .collect()
    }
}
