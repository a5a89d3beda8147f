use retail_sim::agents::heuristic::HeuristicAgent;
use retail_sim::agents::replay::ReplayAgent;
use retail_sim::agents::{build_agent, Agent, AgentDescriptor, AgentError, AgentReply, DecisionContext};
use retail_sim::fixtures::Fixture;
use retail_sim::harness::export::{decisions_csv, decisions_from_csv, from_json, to_json};
use retail_sim::harness::store::SessionStore;
use retail_sim::harness::{build_leaderboard, log_hash, run_session, SessionLog, SessionRunner};
use retail_sim_core::analytics::{coherence, default_collapse_threshold, detect_collapse};
use retail_sim_core::{check_identities, year0, Money};

const COMPLETE: [&str; 5] = ["chatgpt", "gemini-flash", "grok", "meta", "mistral"];

fn replay(name: &str) -> SessionLog {
    let fixture = Fixture::builtin(name).unwrap();
    let desc = AgentDescriptor::replay(&fixture.agent, name);
    let mut agent = ReplayAgent::new(&fixture.agent, &fixture).unwrap();
    run_session(&mut agent, &desc, &year0::default_scenario(), 0).unwrap()
}

fn heuristic_log(seed: u64) -> SessionLog {
    let desc = AgentDescriptor::heuristic();
    let mut agent = HeuristicAgent::new("heuristic");
    run_session(&mut agent, &desc, &year0::default_scenario(), seed).unwrap()
}

#[test]
fn mistral_replay_completes() {
    let log = replay("mistral");
    assert_eq!(log.months.len(), 12);
    let jan = &log.months[0].report.applied;
    assert!(jan.order_units <= 5_000);
    assert_eq!(jan.price, Money::from_units(110));
    assert!(log.months.iter().all(|m| !m.fallback));
    assert!(log.months.iter().all(|m| check_identities(&m.report.statements).is_empty()));
}

#[test]
fn heuristic_never_collapses() {
    let log = heuristic_log(0);
    let revenues: Vec<Money> = log.months.iter().map(|m| m.report.flows.revenue).collect();
    assert!(revenues.iter().all(|r| *r > Money::ZERO), "{revenues:?}");
    assert_eq!(detect_collapse(&revenues, default_collapse_threshold()), None);
}

struct Garbage;

impl Agent for Garbage {
    fn name(&self) -> &str {
        "garbage"
    }

    fn decide(&mut self, _: &DecisionContext<'_>) -> Result<AgentReply, AgentError> {
        let parsed = retail_sim::agents::parse_decision_block("I would rather not say.");
        Ok(AgentReply {
            decision: parsed.decision,
            raw_text: Some(parsed.raw_text),
            diagnostics: parsed.diagnostics,
            attempts: 2,
            ..Default::default()
        })
    }
}

#[test]
fn garbage_agent_falls_back_every_month() {
    let desc = AgentDescriptor::heuristic();
    let sc = year0::default_scenario();
    let log = run_session(&mut Garbage, &desc, &sc, 0).unwrap();
    assert_eq!(log.months.len(), 12);
    assert!(log.months.iter().all(|m| m.fallback && !m.diagnostics.is_empty()));
    // Month 1 falls back to the competitor's opening vector and later months carry it forward.
    assert_eq!(log.months[0].submitted, sc.competitor.months[0]);
    assert!(log.months.iter().all(|m| m.submitted == sc.competitor.months[0]));
    assert_eq!(log.summary.as_ref().unwrap().fallback_months, 12);
}

#[test]
fn replay_leaderboard_is_internally_consistent() {
    let logs: Vec<SessionLog> = COMPLETE.iter().map(|n| replay(n)).collect();
    let rows = build_leaderboard(&logs);
    assert_eq!(rows.len(), 5);
    for log in &logs {
        let row = rows.iter().find(|r| r.session_id == log.session_id).unwrap();
        let total: Money = log.months.iter().map(|m| m.report.flows.revenue).sum();
        assert_eq!(row.revenue, total);
    }
    for pair in rows.windows(2) {
        let (a, b) = (pair[0].net_profit_margin_pct, pair[1].net_profit_margin_pct);
        assert!(a.unwrap_or(f64::NEG_INFINITY) >= b.unwrap_or(f64::NEG_INFINITY));
    }
}

#[test]
fn exports_round_trip() {
    let log = replay("gemini-flash");
    let json = to_json(&log).unwrap();
    assert_eq!(to_json(&from_json(&json).unwrap()).unwrap(), json);

    let csv = decisions_csv(&log).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.lines().next().unwrap().contains("Sales forecast next period $"));
    let fixture = Fixture::builtin("gemini-flash").unwrap();
    assert_eq!(decisions_from_csv(&fixture.agent, &csv).unwrap(), fixture);
}

#[test]
fn coherence_separates_erratic_from_steady_pricing() {
    let prices = |name: &str| -> Vec<f64> {
        Fixture::builtin(name).unwrap().decisions().unwrap().iter().map(|d| d.price).collect()
    };
    let erratic = coherence(&prices("chatgpt"), &[]);
    let steady = coherence(&prices("grok"), &[]);
    assert!(erratic.reversals >= 1);
    assert!(erratic.price_volatility > steady.price_volatility);
}

#[test]
fn same_seed_same_hash() {
    assert_eq!(log_hash(&heuristic_log(5)), log_hash(&heuristic_log(5)));
    let sc = year0::default_scenario();
    let desc = AgentDescriptor {
        kind: retail_sim::agents::AgentKind::Search,
        name: "search".into(),
        fixture: None,
        endpoint: None,
        search_budget: Some(50),
    };
    let run = || {
        let mut agent = build_agent(&desc, &sc, 9).unwrap();
        log_hash(&run_session(agent.as_mut(), &desc, &sc, 9).unwrap())
    };
    assert_eq!(run(), run());
}

/// Stops answering after a given month, like a process killed mid-session.
struct Interrupted {
    inner: HeuristicAgent,
    stop_after: u32,
}

impl Agent for Interrupted {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<AgentReply, AgentError> {
        if ctx.month > self.stop_after {
            return Err(AgentError::Config("killed".into()));
        }
        self.inner.decide(ctx)
    }
}

#[test]
fn resume_after_interruption_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let sc = year0::default_scenario();
    let desc = AgentDescriptor::heuristic();

    let mut broken = Interrupted { inner: HeuristicAgent::new("heuristic"), stop_after: 5 };
    let runner = SessionRunner::new(&sc, "heuristic", 1).with_store(&store);
    assert!(runner.run(&mut broken, &desc).is_err());
    let partial = store.load(&runner.session_id).unwrap();
    assert_eq!(partial.months.len(), 5);
    assert!(partial.summary.is_none());

    let resumed = runner.run(&mut HeuristicAgent::new("heuristic"), &desc).unwrap();
    let uninterrupted = heuristic_log(1);
    assert_eq!(to_json(&resumed).unwrap(), to_json(&uninterrupted).unwrap());
    for (stored, fresh) in partial.months.iter().zip(&uninterrupted.months) {
        assert_eq!(serde_json::to_string(stored).unwrap(), serde_json::to_string(fresh).unwrap());
    }
    let reloaded = store.load(&runner.session_id).unwrap();
    assert_eq!(reloaded.to_log(), resumed);
}
