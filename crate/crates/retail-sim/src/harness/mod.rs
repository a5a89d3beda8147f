//! Runs agents through twelve-month sessions, persists every month as it
//! happens and summarises finished sessions.

pub mod bench;
pub mod export;
pub mod store;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use retail_sim_core::analytics::{
    annual_statements, coherence_of, default_collapse_threshold, rank_rows, session_kpis, AnnualStatements, Coherence,
    LeaderboardRow, SessionKpis,
};
use retail_sim_core::market::competitor_policy;
use retail_sim_core::sim::step;
use retail_sim_core::{DecisionVector, MonthlyReport, Scenario, SimError, SimState, MONTHS};

use crate::agents::{
    year0_block, Agent, AgentDescriptor, AgentError, AgentReply, DecisionContext, ParseDiagnostic, TokenUsage,
};
use store::{Manifest, SessionMode, SessionStore, StoreError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("scenario rejected: {0}")]
    Scenario(#[from] SimError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("stored month {month} of session {session_id} does not match a re-run of its decisions")]
    Diverged { session_id: String, month: u32 },
    #[error("stored session {session_id} was recorded under scenario {stored:?}, not {given:?}")]
    ScenarioMismatch { session_id: String, stored: String, given: String },
}

/// One simulated month as the harness saw it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonthRecord {
    pub month: u32,
    /// Decision handed to the engine (the fallback when `fallback` is set).
    pub submitted: DecisionVector,
    /// The agent produced nothing usable and the fallback was played.
    pub fallback: bool,
    #[serde(default)]
    pub raw_text: Option<String>,
    #[serde(default)]
    pub diagnostics: Vec<ParseDiagnostic>,
    pub attempts: u32,
    #[serde(default)]
    pub latency_ms: Option<u64>,
    #[serde(default)]
    pub usage: Option<TokenUsage>,
    pub report: MonthlyReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub annual: AnnualStatements,
    pub kpis: SessionKpis,
    pub coherence: Coherence,
    pub leaderboard: LeaderboardRow,
    pub fallback_months: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub agent: AgentDescriptor,
    pub scenario_id: String,
    pub schema_version: u32,
    pub seed: u64,
    pub months: Vec<MonthRecord>,
    pub summary: Option<SessionSummary>,
}

impl SessionLog {
    pub fn reports(&self) -> Vec<MonthlyReport> {
        self.months.iter().map(|m| m.report.clone()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.months.len() == MONTHS
    }
}

pub fn summarize(agent: &str, session_id: &str, records: &[MonthRecord]) -> SessionSummary {
    let reports: Vec<MonthlyReport> = records.iter().map(|r| r.report.clone()).collect();
    SessionSummary {
        annual: annual_statements(&reports),
        kpis: session_kpis(&reports),
        coherence: coherence_of(&reports),
        leaderboard: LeaderboardRow::from_reports(agent, session_id, &reports, default_collapse_threshold()),
        fallback_months: records.iter().filter(|r| r.fallback).count() as u32,
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Deterministic id for a batch session.
pub fn session_id(agent: &str, scenario_id: &str, seed: u64) -> String {
    format!("{}-{}-s{seed}", slug(agent), slug(scenario_id))
}

/// SHA-256 over the log with wall-clock latencies removed.
pub fn log_hash(log: &SessionLog) -> String {
    let mut canonical = log.clone();
    for m in &mut canonical.months {
        m.latency_ms = None;
    }
    let bytes = serde_json::to_vec(&canonical).expect("session logs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Decision played when the agent has nothing usable: last month's, or the
/// competitor's opening move in month 1.
pub fn fallback_decision(previous: Option<&DecisionVector>, sc: &Scenario) -> DecisionVector {
    previous.cloned().or_else(|| competitor_policy(1, &sc.competitor).ok()).unwrap_or_default()
}

pub struct SessionRunner<'a> {
    pub scenario: &'a Scenario,
    pub store: Option<&'a SessionStore>,
    pub session_id: String,
    pub seed: u64,
}

impl<'a> SessionRunner<'a> {
    pub fn new(scenario: &'a Scenario, agent_name: &str, seed: u64) -> Self {
        SessionRunner { scenario, store: None, session_id: session_id(agent_name, &scenario.id, seed), seed }
    }

    pub fn with_store(mut self, store: &'a SessionStore) -> Self {
        self.store = Some(store);
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.session_id = id.into();
        self
    }

    /// Runs (or resumes) the session to month 12.
    ///
    /// Months already in the store are re-simulated from their recorded
    /// decisions and must match byte for byte; the agent is only asked about
    /// the months that follow.
    pub fn run(&self, agent: &mut dyn Agent, descriptor: &AgentDescriptor) -> Result<SessionLog, HarnessError> {
        let sc = self.scenario;
        sc.validate()?;
        let mut records: Vec<MonthRecord> = Vec::new();
        let mut state = SimState::opening(&sc.params);

        if let Some(store) = self.store {
            if store.exists(&self.session_id) {
                let stored = store.load(&self.session_id)?;
                if stored.manifest.scenario != *sc {
                    return Err(HarnessError::ScenarioMismatch {
                        session_id: self.session_id.clone(),
                        stored: stored.manifest.scenario.id,
                        given: sc.id.clone(),
                    });
                }
                for record in stored.months {
                    let (next, report) = step(&state, &record.submitted, sc)?;
                    let same = serde_json::to_string(&report).ok() == serde_json::to_string(&record.report).ok();
                    if !same {
                        return Err(HarnessError::Diverged {
                            session_id: self.session_id.clone(),
                            month: record.month,
                        });
                    }
                    state = next;
                    records.push(record);
                }
            } else {
                store.create(&Manifest {
                    session_id: self.session_id.clone(),
                    agent: descriptor.clone(),
                    mode: SessionMode::Agent,
                    seed: self.seed,
                    scenario: sc.clone(),
                })?;
            }
        }

        let year0 = year0_block();
        while !state.is_complete() {
            let month = state.next_month();
            let history: Vec<MonthlyReport> = records.iter().map(|r| r.report.clone()).collect();
            let ctx = DecisionContext { month, scenario: sc, year0, history: &history, state: &state };
            let reply = match agent.decide(&ctx) {
                Ok(r) => r,
                Err(AgentError::Config(msg)) => return Err(AgentError::Config(msg).into()),
                Err(other) => AgentReply {
                    diagnostics: vec![ParseDiagnostic { field: None, problem: other.to_string() }],
                    ..Default::default()
                },
            };
            let previous = records.last().map(|r| &r.submitted);
            let mut diagnostics = reply.diagnostics;
            let attempt = reply.decision.map(|d| (step(&state, &d, sc), d));
            let (next, report, submitted, fallback) = match attempt {
                Some((Ok((next, report)), d)) => (next, report, d, false),
                other => {
                    if let Some((Err(e), _)) = other {
                        diagnostics.push(ParseDiagnostic { field: None, problem: e.to_string() });
                    }
                    let d = fallback_decision(previous, sc);
                    let (next, report) = step(&state, &d, sc)?;
                    (next, report, d, true)
                }
            };
            if fallback {
                tracing::warn!(session = %self.session_id, month, "agent gave no usable decision; fallback played");
            }
            let record = MonthRecord {
                month,
                submitted,
                fallback,
                raw_text: reply.raw_text,
                diagnostics,
                attempts: reply.attempts,
                latency_ms: reply.latency_ms,
                usage: reply.usage,
                report,
            };
            if let Some(store) = self.store {
                store.append_month(&self.session_id, &record)?;
            }
            records.push(record);
            state = next;
        }

        let summary = summarize(&descriptor.name, &self.session_id, &records);
        if let Some(store) = self.store {
            store.write_summary(&self.session_id, &summary)?;
        }
        Ok(SessionLog {
            session_id: self.session_id.clone(),
            agent: descriptor.clone(),
            scenario_id: sc.id.clone(),
            schema_version: sc.schema_version,
            seed: self.seed,
            months: records,
            summary: Some(summary),
        })
    }
}

/// Runs a session without persistence.
pub fn run_session(
    agent: &mut dyn Agent,
    descriptor: &AgentDescriptor,
    scenario: &Scenario,
    seed: u64,
) -> Result<SessionLog, HarnessError> {
    SessionRunner::new(scenario, &descriptor.name, seed).run(agent, descriptor)
}

/// Rows for every finished log, ranked.
pub fn build_leaderboard(logs: &[SessionLog]) -> Vec<LeaderboardRow> {
    let mut rows: Vec<LeaderboardRow> = logs
        .iter()
        .filter(|l| l.is_complete())
        .filter_map(|l| l.summary.as_ref().map(|s| s.leaderboard.clone()))
        .collect();
    rank_rows(&mut rows);
    rows
}

/// Leaderboard over every completed session in a store, agents and humans alike.
pub fn store_leaderboard(store: &SessionStore) -> Result<Vec<LeaderboardRow>, StoreError> {
    let mut logs = Vec::new();
    for id in store.list()? {
        logs.push(store.load(&id)?.to_log());
    }
    Ok(build_leaderboard(&logs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_slugged() {
        assert_eq!(session_id("Meta AI", "default", 3), "meta-ai-default-s3");
        assert_eq!(session_id("Gemini Flash!", "my scen", 0), "gemini-flash-my-scen-s0");
    }
}
