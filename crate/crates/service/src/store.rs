//! Append-only JSON-lines event log, one file per session.

use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use meo_inducer::{FixtureMap, Induction};
use meo_infill::{EngineConfig, EngineReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        id: String,
        at: DateTime<Utc>,
        source_description: String,
        engine_config: EngineConfig,
        clip: serde_json::Value,
    },
    Edited {
        at: DateTime<Utc>,
        instruction: String,
        induction: Induction,
        /// Every agent exchange of the turn, keyed by message hash.
        exchanges: FixtureMap,
        report: EngineReport,
        /// SHA-256 of the edited clip's JSON document.
        clip_sha256: String,
    },
    Undone {
        at: DateTime<Utc>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("no log for session `{0}`")]
    Missing(String),
}

#[derive(Debug, Clone)]
pub struct EventLog {
    dir: PathBuf,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl EventLog {
    pub fn open(data_dir: &Path) -> Result<Self, StoreError> {
        let dir = data_dir.join("sessions");
        fs::create_dir_all(&dir).map_err(|source| StoreError::Io { path: dir.clone(), source })?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.path(id).is_file()
    }

    pub fn append(&self, id: &str, event: &SessionEvent) -> Result<(), StoreError> {
        if !valid_id(id) {
            return Err(StoreError::Missing(id.into()));
        }
        let path = self.path(id);
        let io = |source| StoreError::Io { path: path.clone(), source };
        let mut line = serde_json::to_vec(event).expect("events serialize");
        line.push(b'\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        f.write_all(&line).map_err(io)?;
        f.sync_data().map_err(io)
    }

    pub fn read(&self, id: &str) -> Result<Vec<SessionEvent>, StoreError> {
        if !self.exists(id) {
            return Err(StoreError::Missing(id.into()));
        }
        let path = self.path(id);
        let f = fs::File::open(&path).map_err(|source| StoreError::Io { path: path.clone(), source })?;
        let mut out = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|source| StoreError::Io { path: path.clone(), source })?;
            if line.trim().is_empty() {
                continue;
            }
            let ev = serde_json::from_str(&line)
                .map_err(|e| StoreError::Corrupt { path: path.clone(), line: i + 1, message: e.to_string() })?;
            out.push(ev);
        }
        Ok(out)
    }

    pub fn remove(&self, id: &str) -> Result<(), StoreError> {
        if !self.exists(id) {
            return Err(StoreError::Missing(id.into()));
        }
        let path = self.path(id);
        fs::remove_file(&path).map_err(|source| StoreError::Io { path, source })
    }

    /// Session ids with a log on disk, sorted.
    pub fn ids(&self) -> Result<Vec<String>, StoreError> {
        let rd = fs::read_dir(&self.dir).map_err(|source| StoreError::Io { path: self.dir.clone(), source })?;
        let mut ids: Vec<String> = rd
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str()?.strip_suffix(".jsonl").map(str::to_string))
            .filter(|id| valid_id(id))
            .collect();
        ids.sort();
        Ok(ids)
    }
}
