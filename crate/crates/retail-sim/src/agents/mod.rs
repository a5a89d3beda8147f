//! Decision policies. An agent sees the scenario, the reference-year block and
//! the reports so far, and answers with a decision vector; it never touches
//! the simulation state directly.

pub mod heuristic;
pub mod llm;
pub mod parse;
pub mod prompt;
pub mod replay;
pub mod search;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use retail_sim_core::year0;
use retail_sim_core::{DecisionVector, MonthlyReport, Scenario, SimState, Simulation};

use crate::fixtures::{Fixture, FixtureError};
pub use parse::{parse_decision_block, DecisionParseResult, ParseDiagnostic};

/// What an agent may look at before deciding `month`.
#[derive(Clone, Copy, Debug)]
pub struct DecisionContext<'a> {
    pub month: u32,
    pub scenario: &'a Scenario,
    /// Reference-year reports, January to December.
    pub year0: &'a [MonthlyReport],
    /// Reports of months `1..month` of this session.
    pub history: &'a [MonthlyReport],
    pub state: &'a SimState,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentReply {
    /// `None` when the agent produced nothing usable this month.
    pub decision: Option<DecisionVector>,
    #[serde(default)]
    pub raw_text: Option<String>,
    #[serde(default)]
    pub diagnostics: Vec<ParseDiagnostic>,
    pub attempts: u32,
    /// Wall-clock time spent waiting on a remote model.
    #[serde(default)]
    pub latency_ms: Option<u64>,
    #[serde(default)]
    pub usage: Option<TokenUsage>,
}

impl AgentReply {
    pub fn decided(d: DecisionVector) -> Self {
        AgentReply { decision: Some(d), attempts: 1, ..Default::default() }
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    /// The agent cannot work at all (bad descriptor, missing credentials, rejected token).
    #[error("agent configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("search evaluation failed: {0}")]
    Search(String),
}

pub trait Agent: Send {
    fn name(&self) -> &str;
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<AgentReply, AgentError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Replay,
    Heuristic,
    Search,
    Llm,
    Human,
}

fn default_temperature() -> f64 {
    0.7
}

fn default_retries() -> u32 {
    3
}

fn default_timeout() -> u64 {
    120
}

/// OpenAI-compatible chat endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// e.g. `https://api.example.com/v1`; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token; no header when unset.
    #[serde(default)]
    pub token_env: Option<String>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Hard deadline for one HTTP call, seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Keep only the last N months of conversation (plus the briefing).
    #[serde(default)]
    pub context_months: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDescriptor {
    pub kind: AgentKind,
    pub name: String,
    /// Built-in fixture name or path, for `replay`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<EndpointConfig>,
    /// Simulator evaluations, for `search`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_budget: Option<u32>,
}

impl AgentDescriptor {
    pub fn heuristic() -> Self {
        AgentDescriptor {
            kind: AgentKind::Heuristic,
            name: "heuristic".into(),
            fixture: None,
            endpoint: None,
            search_budget: None,
        }
    }

    pub fn replay(name: &str, fixture: &str) -> Self {
        AgentDescriptor {
            kind: AgentKind::Replay,
            name: name.into(),
            fixture: Some(fixture.into()),
            endpoint: None,
            search_budget: None,
        }
    }

    pub fn human(name: &str) -> Self {
        AgentDescriptor {
            kind: AgentKind::Human,
            name: name.into(),
            fixture: None,
            endpoint: None,
            search_budget: None,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.name.trim().is_empty() {
            return Err(AgentError::Config("agent name is empty".into()));
        }
        match self.kind {
            AgentKind::Replay if self.fixture.is_none() => {
                Err(AgentError::Config(format!("replay agent {:?} needs a fixture", self.name)))
            }
            AgentKind::Llm if self.endpoint.is_none() => {
                Err(AgentError::Config(format!("llm agent {:?} needs an endpoint", self.name)))
            }
            AgentKind::Search if self.search_budget == Some(0) => {
                Err(AgentError::Config("search budget must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

pub const DEFAULT_SEARCH_BUDGET: u32 = 2_000;

/// Instantiates the policy a descriptor names. `seed` drives the search RNG
/// and is forwarded to remote models as their sampling seed.
pub fn build_agent(desc: &AgentDescriptor, scenario: &Scenario, seed: u64) -> Result<Box<dyn Agent>, AgentError> {
    desc.validate()?;
    Ok(match desc.kind {
        AgentKind::Replay => {
            let fixture = Fixture::resolve(desc.fixture.as_deref().unwrap_or_default())?;
            Box::new(replay::ReplayAgent::new(&desc.name, &fixture)?)
        }
        AgentKind::Heuristic => Box::new(heuristic::HeuristicAgent::new(&desc.name)),
        AgentKind::Search => {
            let budget = desc.search_budget.unwrap_or(DEFAULT_SEARCH_BUDGET);
            Box::new(search::SearchAgent::new(&desc.name, scenario, budget, seed)?)
        }
        AgentKind::Llm => {
            let endpoint = desc.endpoint.clone().unwrap_or_else(|| unreachable!("validated above"));
            let transport = llm::HttpTransport::from_config(&endpoint, seed)?;
            Box::new(llm::LlmAgent::new(&desc.name, endpoint, Box::new(transport)))
        }
        AgentKind::Human => {
            return Err(AgentError::Config("human sessions are played through `play` or the HTTP gateway".into()))
        }
    })
}

/// Reports of the reference year, replayed through the engine.
pub fn year0_block() -> &'static [MonthlyReport] {
    static BLOCK: OnceLock<Vec<MonthlyReport>> = OnceLock::new();
    BLOCK.get_or_init(|| {
        let mut sim = Simulation::new(year0::scenario()).expect("built-in reference scenario is valid");
        sim.run_open_loop(&year0::decisions()).expect("reference year replays")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_rules() {
        assert!(AgentDescriptor::heuristic().validate().is_ok());
        let mut d = AgentDescriptor::replay("x", "mistral");
        d.fixture = None;
        assert!(d.validate().is_err());
        let llm = AgentDescriptor {
            kind: AgentKind::Llm,
            name: "m".into(),
            fixture: None,
            endpoint: None,
            search_budget: None,
        };
        assert!(llm.validate().is_err());
    }

    #[test]
    fn descriptor_toml() {
        let d: AgentDescriptor = toml::from_str(
            "kind = \"llm\"\nname = \"local\"\n[endpoint]\nbase_url = \"http://localhost:8080/v1\"\nmodel = \"m\"\n",
        )
        .unwrap();
        let e = d.endpoint.unwrap();
        assert_eq!(e.max_retries, 3);
        assert_eq!(e.temperature, 0.7);
    }

    #[test]
    fn reference_block_ends_at_december_revenue() {
        let block = year0_block();
        assert_eq!(block.len(), 12);
        assert_eq!(block[11].flows.revenue.to_f64(), 520_520.0);
    }
}
