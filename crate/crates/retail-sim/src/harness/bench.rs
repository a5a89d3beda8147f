//! Benchmark manifests: agents × scenarios × repetitions on a worker pool.
//!
//! ```toml
//! scenarios = ["default"]
//! repetitions = 1
//! seed = 0
//!
//! [[agents]]
//! kind = "replay"
//! name = "Mistral AI"
//! fixture = "mistral"
//!
//! [[agents]]
//! kind = "heuristic"
//! name = "heuristic"
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use retail_sim_core::analytics::LeaderboardRow;

use super::export::{export_leaderboard, ExportError};
use super::store::SessionStore;
use super::{build_leaderboard, HarnessError, SessionLog, SessionRunner};
use crate::agents::{build_agent, AgentDescriptor};
use crate::scenario::{self, ScenarioError};

fn default_scenarios() -> Vec<String> {
    vec!["default".into()]
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchManifest {
    pub agents: Vec<AgentDescriptor>,
    /// Built-in ids or scenario file paths.
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<String>,
    /// Sessions per agent and scenario; repetition `r` runs with seed `seed + r`.
    #[serde(default = "one")]
    pub repetitions: u32,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("reading manifest {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("manifest lists no agents")]
    NoAgents,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("session {session}: {source}")]
    Session { session: String, source: HarnessError },
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl BenchManifest {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let m: BenchManifest = toml::from_str(text)?;
        if m.agents.is_empty() {
            return Err(BenchError::NoAgents);
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        BenchManifest::parse(&text)
    }
}

#[derive(Clone, Debug)]
pub struct BenchResult {
    pub logs: Vec<SessionLog>,
    pub leaderboard: Vec<LeaderboardRow>,
}

/// Runs every session of the manifest, persisting under `out/sessions` and
/// writing the leaderboard to `out`.
pub fn run_bench(manifest: &BenchManifest, out: &Path, workers: usize) -> Result<BenchResult, BenchError> {
    let scenarios = manifest.scenarios.iter().map(|s| scenario::resolve(s)).collect::<Result<Vec<_>, _>>()?;
    for desc in &manifest.agents {
        desc.validate().map_err(HarnessError::from)?;
    }
    let store = SessionStore::open(out.join("sessions")).map_err(HarnessError::from)?;
    let mut jobs = Vec::new();
    for sc in &scenarios {
        for desc in &manifest.agents {
            for rep in 0..manifest.repetitions.max(1) {
                jobs.push((sc, desc, manifest.seed + rep as u64));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let logs = pool.install(|| {
        jobs.par_iter()
            .map(|(sc, desc, seed)| {
                let runner = SessionRunner::new(sc, &desc.name, *seed).with_store(&store);
                let session = runner.session_id.clone();
                let wrap = |source: HarnessError| BenchError::Session { session: session.clone(), source };
                let mut agent = build_agent(desc, sc, *seed).map_err(|e| wrap(e.into()))?;
                tracing::info!(session = %runner.session_id, "session started");
                runner.run(agent.as_mut(), desc).map_err(wrap)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let leaderboard = build_leaderboard(&logs);
    export_leaderboard(&leaderboard, out)?;
    Ok(BenchResult { logs, leaderboard })
}
