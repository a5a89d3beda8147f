//! Interactive sessions behind the HTTP API, independent of the transport.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use retail_sim_core::analytics::LeaderboardRow;
use retail_sim_core::sim::step;
use retail_sim_core::{
    CompanyState, DecisionField, DecisionVector, MonthlyReport, Scenario, SimParams, SimState, MONTHS,
};

use crate::agents::parse::FIELD_HEADERS;
use crate::agents::{year0_block, AgentDescriptor};
use crate::harness::store::{month_file, Manifest, SessionMode, SessionStore, StoreError};
use crate::harness::{store_leaderboard, summarize, MonthRecord, SessionSummary};
use crate::scenario;

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(24 * 60 * 60);

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("invalid decisions: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("engine: {0}")]
    Engine(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionStatus {
    AwaitingDecisions { month: u32 },
    Completed,
    Abandoned,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    #[serde(default = "default_scenario_id")]
    pub scenario: String,
    #[serde(default = "default_mode")]
    pub mode: SessionMode,
    #[serde(default)]
    pub player: Option<String>,
}

fn default_scenario_id() -> String {
    "default".into()
}

fn default_mode() -> SessionMode {
    SessionMode::Human
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecisionFieldInfo {
    pub key: DecisionField,
    pub label: String,
    pub required: bool,
}

/// Briefing for month 1: everything the written prompt conveys, as data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpeningContext {
    pub scenario_id: String,
    pub description: String,
    pub params: SimParams,
    pub gdp_outlook: Vec<f64>,
    pub decision_fields: Vec<DecisionFieldInfo>,
    pub opening_state: CompanyState,
    pub year0: Vec<MonthlyReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub mode: SessionMode,
    pub status: SessionStatus,
    pub context: OpeningContext,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub session_id: String,
    pub report: MonthlyReport,
    pub notes: Vec<String>,
    pub status: SessionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<SessionSummary>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub mode: SessionMode,
    pub player: String,
    pub scenario_id: String,
    pub status: SessionStatus,
    pub months_completed: u32,
    pub state: CompanyState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<SessionSummary>,
}

struct Interactive {
    manifest: Manifest,
    state: SimState,
    records: Vec<MonthRecord>,
    abandoned: bool,
    last_activity: Instant,
    idempotency: HashMap<String, (DecisionVector, SubmitResponse)>,
}

impl Interactive {
    fn status(&self) -> SessionStatus {
        if self.state.is_complete() {
            SessionStatus::Completed
        } else if self.abandoned {
            SessionStatus::Abandoned
        } else {
            SessionStatus::AwaitingDecisions { month: self.state.next_month() }
        }
    }

    fn summary(&self) -> Option<SessionSummary> {
        self.state.is_complete().then(|| summarize(&self.manifest.agent.name, &self.manifest.session_id, &self.records))
    }
}

/// Reads a decision document, listing every problem at once. `order_units`
/// and `price` are required; other fields default to 0.
pub fn decision_from_json(v: &Value) -> Result<DecisionVector, GatewayError> {
    let obj = v.as_object().ok_or_else(|| GatewayError::Validation(vec!["decisions must be an object".into()]))?;
    let mut problems = Vec::new();
    for key in obj.keys() {
        if !DecisionField::ALL.iter().any(|f| f.name() == key) {
            problems.push(format!("{key}: unknown field"));
        }
    }
    let mut d = DecisionVector::default();
    for field in DecisionField::ALL {
        match obj.get(field.name()) {
            None | Some(Value::Null) if field.is_required() => problems.push(format!("{}: required", field.name())),
            None | Some(Value::Null) => {}
            Some(Value::Number(n)) => match n.as_f64() {
                Some(x) if x.is_finite() => d.set(field, x),
                _ => problems.push(format!("{}: not a finite number", field.name())),
            },
            Some(_) => problems.push(format!("{}: must be a number", field.name())),
        }
    }
    if problems.is_empty() {
        Ok(d)
    } else {
        Err(GatewayError::Validation(problems))
    }
}

pub struct GameService {
    store: SessionStore,
    idle_timeout: Duration,
    sessions: RwLock<HashMap<String, Arc<Mutex<Interactive>>>>,
}

impl GameService {
    pub fn new(store: SessionStore, idle_timeout: Duration) -> Self {
        GameService { store, idle_timeout, sessions: RwLock::new(HashMap::new()) }
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn scenarios(&self) -> Vec<(String, String)> {
        scenario::BUILTIN.iter().filter_map(|id| scenario::builtin(id)).map(|s| (s.id, s.description)).collect()
    }

    pub fn create(&self, req: CreateRequest) -> Result<CreateResponse, GatewayError> {
        let sc = scenario::builtin(&req.scenario)
            .ok_or_else(|| GatewayError::NotFound(format!("scenario {:?}", req.scenario)))?;
        let player = req.player.filter(|p| !p.trim().is_empty()).unwrap_or_else(|| "human".into());
        let session_id = uuid::Uuid::new_v4().to_string();
        let manifest = Manifest {
            session_id: session_id.clone(),
            agent: AgentDescriptor::human(&player),
            mode: req.mode,
            seed: 0,
            scenario: sc.clone(),
        };
        self.store.create(&manifest)?;
        let state = SimState::opening(&sc.params);
        let context = opening_context(&sc, &state);
        let session = Interactive {
            manifest,
            state,
            records: Vec::new(),
            abandoned: false,
            last_activity: Instant::now(),
            idempotency: HashMap::new(),
        };
        let status = session.status();
        self.sessions.write().expect("session map lock").insert(session_id.clone(), Arc::new(Mutex::new(session)));
        Ok(CreateResponse { session_id, mode: req.mode, status, context })
    }

    /// In-memory session, reloading it from disk after a restart.
    fn session(&self, id: &str) -> Result<Arc<Mutex<Interactive>>, GatewayError> {
        if let Some(s) = self.sessions.read().expect("session map lock").get(id) {
            return Ok(s.clone());
        }
        if uuid::Uuid::parse_str(id).is_err() || !self.store.exists(id) {
            return Err(GatewayError::NotFound(format!("session {id:?}")));
        }
        let stored = self.store.load(id)?;
        if stored.manifest.mode == SessionMode::Agent {
            return Err(GatewayError::NotFound(format!("interactive session {id:?}")));
        }
        let sc = &stored.manifest.scenario;
        let mut state = SimState::opening(&sc.params);
        for r in &stored.months {
            state = step(&state, &r.submitted, sc).map_err(|e| GatewayError::Engine(e.to_string()))?.0;
        }
        let session = Arc::new(Mutex::new(Interactive {
            manifest: stored.manifest,
            state,
            records: stored.months,
            abandoned: stored.abandoned,
            last_activity: Instant::now(),
            idempotency: HashMap::new(),
        }));
        let mut map = self.sessions.write().expect("session map lock");
        Ok(map.entry(id.to_string()).or_insert(session).clone())
    }

    fn touch(&self, s: &mut Interactive) -> Result<(), GatewayError> {
        if !s.abandoned && !s.state.is_complete() && s.last_activity.elapsed() > self.idle_timeout {
            s.abandoned = true;
            self.store.mark_abandoned(&s.manifest.session_id)?;
        }
        if !s.abandoned {
            s.last_activity = Instant::now();
        }
        Ok(())
    }

    pub fn view(&self, id: &str) -> Result<SessionView, GatewayError> {
        let arc = self.session(id)?;
        let mut s = arc.lock().expect("session lock");
        self.touch(&mut s)?;
        Ok(SessionView {
            session_id: s.manifest.session_id.clone(),
            mode: s.manifest.mode,
            player: s.manifest.agent.name.clone(),
            scenario_id: s.manifest.scenario.id.clone(),
            status: s.status(),
            months_completed: s.records.len() as u32,
            state: s.state.own.clone(),
            summary: s.summary(),
        })
    }

    pub fn submit(
        &self,
        id: &str,
        month: u32,
        decisions: DecisionVector,
        idempotency_key: Option<&str>,
    ) -> Result<SubmitResponse, GatewayError> {
        let arc = self.session(id)?;
        let mut s = arc.lock().expect("session lock");
        if let Some(key) = idempotency_key {
            if let Some((earlier, response)) = s.idempotency.get(key) {
                if *earlier != decisions || response.report.month != month {
                    return Err(GatewayError::Conflict(format!(
                        "idempotency key {key:?} was used for a different submission"
                    )));
                }
                return Ok(response.clone());
            }
        }
        self.touch(&mut s)?;
        if s.manifest.mode == SessionMode::Spectate {
            return Err(GatewayError::Conflict("spectator sessions do not accept decisions".into()));
        }
        match s.status() {
            SessionStatus::Completed => {
                return Err(GatewayError::Conflict(format!("session completed all {MONTHS} months")))
            }
            SessionStatus::Abandoned => {
                return Err(GatewayError::Conflict("session was abandoned after idling".into()))
            }
            SessionStatus::AwaitingDecisions { month: expected } if expected != month => {
                return Err(GatewayError::Conflict(format!("session is awaiting month {expected}, not {month}")))
            }
            SessionStatus::AwaitingDecisions { .. } => {}
        }
        let (next, report) = step(&s.state, &decisions, &s.manifest.scenario)
            .map_err(|e| GatewayError::Validation(vec![e.to_string()]))?;
        let record = MonthRecord {
            month,
            submitted: decisions.clone(),
            fallback: false,
            raw_text: None,
            diagnostics: Vec::new(),
            attempts: 1,
            latency_ms: None,
            usage: None,
            report: report.clone(),
        };
        self.store.append_month(id, &record)?;
        s.records.push(record);
        s.state = next;
        let summary = s.summary();
        if let Some(summary) = &summary {
            self.store.write_summary(id, summary)?;
        }
        let response = SubmitResponse {
            session_id: id.to_string(),
            notes: report.applied.notes.iter().map(|n| n.to_string()).collect(),
            report,
            status: s.status(),
            summary,
        };
        if let Some(key) = idempotency_key {
            s.idempotency.insert(key.to_string(), (decisions, response.clone()));
        }
        Ok(response)
    }

    /// Stored report, read from the session directory.
    pub fn report(&self, id: &str, month: u32) -> Result<MonthlyReport, GatewayError> {
        let missing = || GatewayError::NotFound(format!("report for month {month} of session {id:?}"));
        if month == 0 || month as usize > MONTHS || !self.store.exists(id) {
            return Err(missing());
        }
        let path = self.store.session_dir(id).join(month_file(month));
        let bytes = std::fs::read(&path).map_err(|_| missing())?;
        let record: MonthRecord =
            serde_json::from_slice(&bytes).map_err(|e| GatewayError::Engine(format!("{}: {e}", path.display())))?;
        Ok(record.report)
    }

    pub fn leaderboard(&self) -> Result<Vec<LeaderboardRow>, GatewayError> {
        Ok(store_leaderboard(&self.store)?)
    }
}

fn opening_context(sc: &Scenario, state: &SimState) -> OpeningContext {
    OpeningContext {
        scenario_id: sc.id.clone(),
        description: sc.description.clone(),
        params: sc.params.clone(),
        gdp_outlook: sc.calendar.gdp_path.clone(),
        decision_fields: FIELD_HEADERS
            .iter()
            .map(|(key, label)| DecisionFieldInfo { key: *key, label: label.to_string(), required: key.is_required() })
            .chain([DecisionFieldInfo {
                key: DecisionField::DividendRate,
                label: crate::agents::parse::DIVIDEND_HEADER.to_string(),
                required: false,
            }])
            .collect(),
        opening_state: state.own.clone(),
        year0: year0_block().to_vec(),
    }
}
