//! Acceptance gate: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use common::Gateway;
use retail_sim::agents::heuristic::HeuristicAgent;
use retail_sim::agents::replay::ReplayAgent;
use retail_sim::agents::{build_agent, AgentDescriptor, AgentKind};
use retail_sim::fixtures::Fixture;
use retail_sim::gateway::DEFAULT_IDLE_TIMEOUT;
use retail_sim::harness::export::{decisions_csv, decisions_from_csv};
use retail_sim::harness::{log_hash, run_session, SessionLog};
use retail_sim_core::analytics::{annual_statements, default_collapse_threshold, detect_collapse};
use retail_sim_core::calibrate::calibrate_calendar;
use retail_sim_core::sim::{step, SimState};
use retail_sim_core::{check_identities, year0, DecisionVector, Money, MonthlyReport, Scenario, Simulation};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-9
}

/// Collects mismatches so a criterion reports all of them at once.
#[derive(Default)]
struct Checks(Vec<String>);

impl Checks {
    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        if !close(got, want, tol) {
            self.0.push(format!("{what}: got {got}, want {want} ±{tol}"));
        }
    }

    fn that(&mut self, what: &str, ok: bool) {
        if !ok {
            self.0.push(what.to_string());
        }
    }

    fn done(self, detail: impl Into<String>) -> Outcome {
        if self.0.is_empty() {
            Ok(detail.into())
        } else {
            Err(self.0.join("; "))
        }
    }
}

fn year0_replay() -> Vec<MonthlyReport> {
    let mut sim = Simulation::new(year0::scenario()).unwrap();
    sim.run_open_loop(&year0::decisions()).unwrap()
}

fn year0_anchors() -> Outcome {
    let started = Instant::now();
    let r = year0_replay();
    let mut c = Checks::default();
    for m in &r {
        c.that(
            &format!("month {} depreciation", m.month),
            m.statements.income.depreciation == Money::from_units(7_000),
        );
        c.near(
            &format!("month {} provisions change", m.month),
            m.statements.cash_flow.provisions_change.to_f64(),
            m.flows.worker_wages.to_f64() * 0.05,
            0.01,
        );
    }
    let jan = &r[0];
    c.near("January interest", jan.statements.income.interest.to_f64(), 5_000.0, 0.01);
    c.near("January tax", jan.statements.income.tax.to_f64(), 1_859.44, 0.01);
    c.near("January net income", jan.statements.income.net_income.to_f64(), 7_437.76, 0.01);
    c.near("January cash change", jan.statements.cash_flow.net_cash_change.to_f64(), -113_742.24, 0.01);
    c.near("January cash end", jan.statements.cash_flow.cash_end.to_f64(), 887_257.76, 0.01);
    c.that("February PBT is negative", r[1].statements.income.profit_before_tax.is_negative());
    c.that("February tax is zero", r[1].statements.income.tax == Money::ZERO);
    for (m, want) in r.iter().zip([9.40, 8.84, 8.31, 7.81, 7.34]) {
        c.near(&format!("month {} staff", m.month), m.flows.workers, want, 0.01);
    }
    for (m, want) in r.iter().zip([9.90, 9.80, 9.70, 9.61]) {
        c.near(&format!("month {} productivity", m.month), m.flows.productivity, want, 0.005);
    }
    for (m, want) in r.iter().zip([42.28, 11.46, 42.47]) {
        c.near(&format!("month {} carbon", m.month), m.flows.carbon_tons, want, 0.01);
    }
    c.near("January capacity utilization", jan.kpis.capacity_utilization_pct.unwrap_or(f64::NAN), 24.78, 0.05);
    c.near("February capacity utilization", r[1].kpis.capacity_utilization_pct.unwrap_or(f64::NAN), 1.20, 0.05);
    c.near("January ROI", jan.kpis.roi_pct.unwrap_or(f64::NAN), 0.26, 0.01);
    c.near("January ROA", jan.kpis.roa_pct.unwrap_or(f64::NAN), 0.25, 0.01);
    c.near("January leverage", jan.kpis.leverage_pct.unwrap_or(f64::NAN), 3.64, 0.01);
    c.near("January gross margin", jan.kpis.gross_margin_pct.unwrap_or(f64::NAN), 0.06, 0.01);
    let elapsed = started.elapsed();
    c.that(&format!("replay took {elapsed:?}"), elapsed < Duration::from_secs(1));
    c.done(format!("replayed in {elapsed:?}"))
}

fn run_open(sc: &Scenario, decisions: &[DecisionVector]) -> Vec<MonthlyReport> {
    Simulation::new(sc.clone()).unwrap().run_open_loop(decisions).unwrap()
}

fn quiet_month() -> DecisionVector {
    DecisionVector { order_units: 3_000.0, price: 110.0, ..Default::default() }
}

fn table1_identities() -> Outcome {
    let mut c = Checks::default();
    // Published columns: worker wages + S&A wages + hiring/dismissal cost = staff costs.
    for (who, wages, sa, hiring, staff) in [
        ("Mistral", 283_381, 56_676, 34_000, 374_057),
        ("ChatGPT", 305_983, 61_197, 20_000, 387_180),
        ("Gemini Flash", 293_186, 58_637, 18_000, 369_823),
    ] {
        c.that(&format!("{who} staff costs {staff}"), wages + sa + hiring == staff);
    }
    // The engine books staff costs from the same three lines.
    let sc = year0::default_scenario();
    let mut plan = vec![quiet_month(); 12];
    plan[0].workers_hired = 3.0;
    plan[3].workers_dismissed = 1.0;
    let reports = run_open(&sc, &plan);
    for m in &reports {
        c.that(
            &format!("engine staff costs month {}", m.month),
            m.flows.staff_costs == m.flows.worker_wages + m.flows.sa_wages + m.flows.hiring_dismissal_cost,
        );
    }

    // Annual interest on a debt level held all year.
    for (debt, want) in [(100_000.0, 60_000.0), (112_500.0, 67_500.0)] {
        let mut plan = vec![quiet_month(); 12];
        plan[0].loans = debt - sc.params.initial_long_term_debt;
        let annual = annual_statements(&run_open(&sc, &plan));
        c.near(&format!("annual interest on {debt}"), annual.income.interest.to_f64(), want, 1.0);
        c.near(&format!("12 x 0.05 x {debt}"), 12.0 * 0.05 * debt, want, 1.0);
    }

    // Hiring/dismissal cost for the six published columns, in the engine and in the published arithmetic.
    for (who, hires, dismissals, cost) in [
        ("Mistral", 13, 2, 34_000),
        ("Gemini Flash", 9, 0, 18_000),
        ("Meta", 4, 4, 24_000),
        ("Grok", 8, 7, 44_000),
        ("ChatGPT", 10, 0, 20_000),
        ("Gemini Pro", 9, 4, 34_000),
    ] {
        c.that(&format!("{who} published hiring cost"), 2_000 * hires + 4_000 * dismissals == cost);
        let mut plan = vec![quiet_month(); 12];
        plan[0].workers_hired = hires as f64;
        plan[1].workers_dismissed = dismissals as f64;
        let total: Money = run_open(&sc, &plan).iter().map(|m| m.flows.hiring_dismissal_cost).sum();
        c.that(&format!("{who} engine hiring cost {total}"), total == Money::from_units(cost));
    }
    c.done("staff, interest and hiring lines")
}

fn random_decision(rng: &mut ChaCha8Rng) -> DecisionVector {
    DecisionVector {
        order_units: rng.random_range(0.0f64..20_000.0).round(),
        price: rng.random_range(-20.0..300.0),
        workers_hired: rng.random_range(0.0f64..8.0).floor(),
        workers_dismissed: rng.random_range(0.0f64..8.0).floor(),
        marketing_expense: rng.random_range(0.0..150_000.0),
        loans: rng.random_range(0.0..400_000.0),
        training_expense: rng.random_range(0.0..40_000.0),
        rnd_expense: rng.random_range(0.0..40_000.0),
        sales_forecast_next: rng.random_range(-1e6..1e6),
        net_income_forecast: rng.random_range(-1e6..1e6),
        dividend_rate: rng.random_range(0.0..1.0),
    }
}

fn fuzz_session(sc: &Scenario, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SimState::opening(&sc.params);
    for _ in 0..12 {
        let d = random_decision(&mut rng);
        let opening_units = state.own.inventory_units;
        let (next, report) = step(&state, &d, sc).map_err(|e| format!("session {seed}: {e}"))?;
        let broken = check_identities(&report.statements);
        if !broken.is_empty() {
            return Err(format!("session {seed} month {}: {broken:?}", report.month));
        }
        let f = &report.flows;
        if report.statements.balance.inventory_units != opening_units + f.units_received - f.units_sold {
            return Err(format!("session {seed} month {}: inventory roll", report.month));
        }
        state = next;
    }
    Ok(())
}

fn fuzz_identities() -> Outcome {
    let started = Instant::now();
    let sc = year0::default_scenario();
    let failures: Vec<String> = (0..10_000u64).into_par_iter().filter_map(|s| fuzz_session(&sc, s).err()).collect();
    let elapsed = started.elapsed();
    let mut c = Checks::default();
    c.that(&format!("{} failing sessions, first: {:?}", failures.len(), failures.first()), failures.is_empty());
    c.that(&format!("took {elapsed:?}"), elapsed < Duration::from_secs(60));
    c.done(format!("10,000 sessions in {elapsed:?}"))
}

const COMPLETE: [&str; 5] = ["mistral", "chatgpt", "gemini-flash", "meta", "grok"];

fn fixture_replays() -> Outcome {
    let sc = year0::default_scenario();
    let mut c = Checks::default();
    for name in COMPLETE {
        let fixture = Fixture::builtin(name).unwrap();
        let desc = AgentDescriptor::replay(&fixture.agent, name);
        let mut agent = ReplayAgent::new(&fixture.agent, &fixture).unwrap();
        let log = match run_session(&mut agent, &desc, &sc, 0) {
            Ok(log) => log,
            Err(e) => {
                c.that(&format!("{name}: {e}"), false);
                continue;
            }
        };
        c.that(&format!("{name} completes 12 months"), log.is_complete() && log.months.iter().all(|m| !m.fallback));
        let exported = decisions_from_csv(&fixture.agent, &decisions_csv(&log).unwrap()).unwrap();
        c.that(&format!("{name} exported table differs"), exported.rows == fixture.rows);
    }
    c.done("five fixtures replayed and round-tripped")
}

fn heuristic_log(seed: u64) -> SessionLog {
    let mut agent = HeuristicAgent::new("heuristic");
    run_session(&mut agent, &AgentDescriptor::heuristic(), &year0::default_scenario(), seed).unwrap()
}

fn collapse_detection() -> Outcome {
    let threshold = default_collapse_threshold();
    let revenues = |reports: &[MonthlyReport]| reports.iter().map(|r| r.flows.revenue).collect::<Vec<_>>();
    let heuristic = detect_collapse(&revenues(&heuristic_log(0).reports()), threshold);

    let mut starve = vec![DecisionVector { order_units: 0.0, price: 110.0, ..Default::default() }; 12];
    starve[0].order_units = 4_000.0;
    let starved = detect_collapse(&revenues(&run_open(&year0::default_scenario(), &starve)), threshold);

    let mut c = Checks::default();
    c.that(&format!("heuristic collapses at {heuristic:?}"), heuristic.is_none());
    c.that(&format!("starvation collapse at {starved:?}"), starved.is_some_and(|m| m <= 6));
    c.done(format!("heuristic none, starvation month {}", starved.unwrap_or(0)))
}

fn calibration() -> Outcome {
    let cal = calibrate_calendar(&year0::default_scenario().params);
    let worst = cal.max_abs_residual();
    let mut c = Checks::default();
    c.that(&format!("max residual {worst}"), worst <= 0.02);
    c.that("twelve baselines", cal.calendar.base_units.len() == 12);
    c.done(format!("max residual {:.4}%", worst * 100.0))
}

fn dual_path() -> Outcome {
    let log = heuristic_log(0);
    let gw = Gateway::start(DEFAULT_IDLE_TIMEOUT, None);
    let (status, created) = gw.post("/sessions", &json!({"scenario": "default"}));
    if status != 201 {
        return Err(format!("create returned {status}"));
    }
    let id = created["session_id"].as_str().unwrap_or_default().to_string();
    let mut c = Checks::default();
    for m in &log.months {
        let (status, body) =
            gw.post(&format!("/sessions/{id}/decisions"), &json!({"month": m.month, "decisions": m.submitted}));
        if status != 200 {
            return Err(format!("month {} returned {status}: {body}", m.month));
        }
        let via_http: MonthlyReport = serde_json::from_value(body["report"].clone()).map_err(|e| e.to_string())?;
        c.that(
            &format!("month {} differs", m.month),
            serde_json::to_string(&via_http).unwrap() == serde_json::to_string(&m.report).unwrap(),
        );
    }
    c.done("12 reports byte-identical")
}

fn repeatability() -> Outcome {
    let sc = year0::default_scenario();
    let mut c = Checks::default();
    c.that("heuristic hash differs", log_hash(&heuristic_log(3)) == log_hash(&heuristic_log(3)));
    let desc = AgentDescriptor {
        kind: AgentKind::Search,
        name: "search".into(),
        fixture: None,
        endpoint: None,
        search_budget: Some(200),
    };
    let search = || {
        let mut agent = build_agent(&desc, &sc, 11).unwrap();
        log_hash(&run_session(agent.as_mut(), &desc, &sc, 11).unwrap())
    };
    c.that("search hash differs", search() == search());
    c.done("heuristic and search hashes stable")
}

fn prompt_goal() -> Outcome {
    let text = retail_sim::agents::prompt::render_initial_prompt(
        &year0::default_scenario(),
        retail_sim::agents::year0_block(),
    );
    let mut c = Checks::default();
    c.that(
        "sentence missing",
        text.contains("Your primary goal is to maximize company profit, market share, and long-term sustainability"),
    );
    c.done("initial briefing")
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("year-0 anchor suite", year0_anchors),
        ("staff, interest and hiring cost identities", table1_identities),
        ("accounting identities under 10,000 fuzz sessions", fuzz_identities),
        ("fixture replays and decision-table round trip", fixture_replays),
        ("collapse detection", collapse_detection),
        ("demand calibration residual", calibration),
        ("HTTP and harness produce identical reports", dual_path),
        ("same seed, same session hash", repeatability),
        ("prompt carries the goal sentence", prompt_goal),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
