//! On-disk session layout: one directory per session holding `manifest.json`,
//! one `month-NN.json` per completed month and, once the year is over,
//! `summary.json`. Files are written to a temporary name and renamed, so a
//! crash never leaves a half-written month behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use retail_sim_core::{check_identities, Scenario, MONTHS};

use super::{MonthRecord, SessionLog, SessionSummary};
use crate::agents::AgentDescriptor;

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.json";
pub const ABANDONED: &str = "abandoned.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("session {0:?} not found")]
    NotFound(String),
    #[error("session {0:?} already exists")]
    Exists(String),
    #[error("{path}: month {month} fails the accounting identities")]
    Corrupt { path: PathBuf, month: u32 },
    #[error("{path}: expected month {expected}, found {found}")]
    Gap { path: PathBuf, expected: u32, found: u32 },
}

/// Who drives a session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionMode {
    Agent,
    Human,
    Spectate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub session_id: String,
    pub agent: AgentDescriptor,
    pub mode: SessionMode,
    pub seed: u64,
    pub scenario: Scenario,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("json.tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let text =
        serde_json::to_vec_pretty(value).map_err(|source| StoreError::Json { path: path.to_path_buf(), source })?;
    write_atomic(path, &text)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&text).map_err(|source| StoreError::Json { path: path.to_path_buf(), source })
}

pub fn month_file(month: u32) -> String {
    format!("month-{month:02}.json")
}

/// Root directory holding many session directories.
#[derive(Clone, Debug)]
pub struct SessionStore {
    root: PathBuf,
}

/// Everything persisted for one session.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredSession {
    pub manifest: Manifest,
    pub months: Vec<MonthRecord>,
    pub summary: Option<SessionSummary>,
    pub abandoned: bool,
}

impl StoredSession {
    pub fn to_log(&self) -> SessionLog {
        SessionLog {
            session_id: self.manifest.session_id.clone(),
            agent: self.manifest.agent.clone(),
            scenario_id: self.manifest.scenario.id.clone(),
            schema_version: self.manifest.scenario.schema_version,
            seed: self.manifest.seed,
            months: self.months.clone(),
            summary: self.summary.clone(),
        }
    }
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(SessionStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn exists(&self, id: &str) -> bool {
        self.session_dir(id).join(MANIFEST).exists()
    }

    pub fn create(&self, manifest: &Manifest) -> Result<(), StoreError> {
        let dir = self.session_dir(&manifest.session_id);
        if dir.join(MANIFEST).exists() {
            return Err(StoreError::Exists(manifest.session_id.clone()));
        }
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        write_json(&dir.join(MANIFEST), manifest)
    }

    /// Appends a month. Months already on disk are never rewritten.
    pub fn append_month(&self, id: &str, record: &MonthRecord) -> Result<(), StoreError> {
        let dir = self.session_dir(id);
        if !dir.join(MANIFEST).exists() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let path = dir.join(month_file(record.month));
        if path.exists() {
            return Err(StoreError::Exists(format!("{id}/{}", month_file(record.month))));
        }
        write_json(&path, record)
    }

    pub fn write_summary(&self, id: &str, summary: &SessionSummary) -> Result<(), StoreError> {
        write_json(&self.session_dir(id).join(SUMMARY), summary)
    }

    pub fn mark_abandoned(&self, id: &str) -> Result<(), StoreError> {
        write_json(&self.session_dir(id).join(ABANDONED), &serde_json::json!({ "abandoned": true }))
    }

    pub fn load(&self, id: &str) -> Result<StoredSession, StoreError> {
        let dir = self.session_dir(id);
        let manifest_path = dir.join(MANIFEST);
        if !manifest_path.exists() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let manifest: Manifest = read_json(&manifest_path)?;
        let mut months = Vec::new();
        for month in 1..=MONTHS as u32 {
            let path = dir.join(month_file(month));
            if !path.exists() {
                break;
            }
            let record: MonthRecord = read_json(&path)?;
            if record.month != month {
                return Err(StoreError::Gap { path, expected: month, found: record.month });
            }
            if !check_identities(&record.report.statements).is_empty() {
                return Err(StoreError::Corrupt { path, month });
            }
            months.push(record);
        }
        let summary_path = dir.join(SUMMARY);
        let summary = if summary_path.exists() { Some(read_json(&summary_path)?) } else { None };
        Ok(StoredSession { manifest, months, summary, abandoned: dir.join(ABANDONED).exists() })
    }

    /// Ids of every session directory, sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let entry = entry.map_err(io_err(&self.root))?;
            if entry.path().join(MANIFEST).exists() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }
}
