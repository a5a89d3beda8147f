use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use retail_sim::agents::prompt::{render_followup_prompt, render_initial_prompt};
use retail_sim::agents::replay::ReplayAgent;
use retail_sim::agents::{parse_decision_block, year0_block, AgentDescriptor, AgentKind, EndpointConfig};
use retail_sim::fixtures::Fixture;
use retail_sim::format::render_statements;
use retail_sim::gateway::service::{CreateRequest, SessionStatus};
use retail_sim::gateway::{serve_blocking, GameService};
use retail_sim::harness::bench::{run_bench, BenchManifest};
use retail_sim::harness::export::export_session;
use retail_sim::harness::store::{SessionMode, SessionStore};
use retail_sim::harness::SessionRunner;
use retail_sim::scenario;
use retail_sim_core::calibrate::calibrate_calendar;
use retail_sim_core::year0::UNITS;

#[derive(Parser)]
#[command(
    name = "retail-sim",
    version,
    about = "Twelve-month retailer simulation: benchmark runs, replays, play and the HTTP gateway"
)]
struct Cli {
    /// Built-in scenario id or path to a scenario file.
    #[arg(long, global = true, default_value = "default")]
    scenario: String,
    /// Benchmark manifest (TOML).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory; sessions are stored under `<out>/sessions`.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 4)]
    workers: usize,
    /// `KEY=VALUE` file loaded into the environment before any endpoint is contacted.
    #[arg(long, global = true)]
    endpoint_env: Option<PathBuf>,
    /// TOML file of `[endpoints.<agent name>]` tables for llm agents without an inline endpoint.
    #[arg(long, global = true)]
    endpoints: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every agent of a manifest and write the leaderboard.
    Bench,
    /// Replay a fixture (built-in name or TSV path) as a stored session.
    Replay { fixture: String },
    /// Play the year in the terminal.
    Play {
        /// Continue an earlier session instead of starting one.
        #[arg(long)]
        resume: Option<String>,
        #[arg(long, default_value = "human")]
        player: String,
    },
    /// Start the HTTP gateway.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Directory of static files served next to the API.
        #[arg(long)]
        assets: Option<PathBuf>,
        /// Seconds without a submission before a session is abandoned.
        #[arg(long, default_value_t = 24 * 60 * 60)]
        idle_timeout: u64,
    },
    /// Load and check a scenario.
    Validate { scenario: String },
    /// Fit the monthly demand baselines to the reference year and print residuals.
    Calibrate,
    /// Write the JSON log and decision CSV of a stored session.
    Export {
        session: String,
        /// Destination directory; defaults to the session directory.
        #[arg(long)]
        to: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EndpointFile {
    endpoints: BTreeMap<String, EndpointConfig>,
}

fn load_env_file(path: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line = line.strip_prefix("export ").unwrap_or(line);
        let (key, value) =
            line.split_once('=').ok_or_else(|| format!("{}:{}: expected KEY=VALUE", path.display(), n + 1))?;
        let value = value.trim().trim_matches('"');
        std::env::set_var(key.trim(), value);
    }
    Ok(())
}

fn attach_endpoints(manifest: &mut BenchManifest, path: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: EndpointFile = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for agent in &mut manifest.agents {
        if agent.kind == AgentKind::Llm && agent.endpoint.is_none() {
            agent.endpoint = file.endpoints.get(&agent.name).cloned();
        }
    }
    Ok(())
}

fn store(out: &Path) -> Result<SessionStore, String> {
    SessionStore::open(out.join("sessions")).map_err(|e| e.to_string())
}

fn bench(cli: &Cli) -> Result<(), String> {
    let path = cli.manifest.as_ref().ok_or("bench needs --manifest <file>")?;
    let mut manifest = BenchManifest::load(path).map_err(|e| e.to_string())?;
    if let Some(endpoints) = &cli.endpoints {
        attach_endpoints(&mut manifest, endpoints)?;
    }
    let result = run_bench(&manifest, &cli.out, cli.workers).map_err(|e| e.to_string())?;
    println!("{:<4} {:<36} {:>16} {:>12}", "rank", "session", "net income", "margin %");
    for (i, row) in result.leaderboard.iter().enumerate() {
        let margin = row.net_profit_margin_pct.map_or("-".to_string(), |m| format!("{m:.2}"));
        println!("{:<4} {:<36} {:>16} {:>12}", i + 1, row.session_id, row.net_income.grouped(), margin);
    }
    println!("leaderboard written to {}", cli.out.display());
    Ok(())
}

fn replay(cli: &Cli, fixture: &str) -> Result<(), String> {
    let sc = scenario::resolve(&cli.scenario).map_err(|e| e.to_string())?;
    let fx = Fixture::resolve(fixture).map_err(|e| e.to_string())?;
    let desc = AgentDescriptor::replay(&fx.agent, fixture);
    let mut agent = ReplayAgent::new(&fx.agent, &fx).map_err(|e| e.to_string())?;
    let store = store(&cli.out)?;
    let runner = SessionRunner::new(&sc, &fx.agent, cli.seed).with_store(&store);
    let log = runner.run(&mut agent, &desc).map_err(|e| e.to_string())?;
    print!("{}", render_statements(&log.reports()));
    println!("session {} stored in {}", log.session_id, store.session_dir(&log.session_id).display());
    Ok(())
}

/// Reads one decision block: lines up to a blank line or end of input.
fn read_block(input: &mut impl BufRead) -> Result<Option<String>, String> {
    let mut block = String::new();
    loop {
        let mut line = String::new();
        let n = input.read_line(&mut line).map_err(|e| e.to_string())?;
        if n == 0 {
            return Ok((!block.trim().is_empty()).then_some(block));
        }
        if line.trim().is_empty() {
            if block.trim().is_empty() {
                continue;
            }
            return Ok(Some(block));
        }
        block.push_str(&line);
    }
}

fn play(cli: &Cli, resume: Option<&str>, player: &str) -> Result<(), String> {
    let svc = GameService::new(store(&cli.out)?, Duration::from_secs(u64::MAX / 4));
    let (id, mut month) = match resume {
        Some(id) => {
            let view = svc.view(id).map_err(|e| e.to_string())?;
            match view.status {
                SessionStatus::AwaitingDecisions { month } => (id.to_string(), month),
                other => return Err(format!("session {id} cannot continue: {other:?}")),
            }
        }
        None => {
            let req =
                CreateRequest { scenario: cli.scenario.clone(), mode: SessionMode::Human, player: Some(player.into()) };
            let created = svc.create(req).map_err(|e| e.to_string())?;
            let sc = scenario::resolve(&cli.scenario).map_err(|e| e.to_string())?;
            println!("{}", render_initial_prompt(&sc, year0_block()));
            (created.session_id, 1)
        }
    };
    println!("session {id}; enter one decision per line as `Field: value`, then a blank line");
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    loop {
        print!("month {month}> ");
        std::io::stdout().flush().ok();
        let Some(block) = read_block(&mut input)? else {
            return Err(format!("input ended before month {month}; continue with `play --resume {id}`"));
        };
        let parsed = parse_decision_block(&block);
        let Some(decision) = parsed.decision else {
            for d in &parsed.diagnostics {
                println!("  {}", d.problem);
            }
            continue;
        };
        let resp = match svc.submit(&id, month, decision, None) {
            Ok(resp) => resp,
            Err(e) => return Err(e.to_string()),
        };
        match resp.status {
            SessionStatus::AwaitingDecisions { month: next } => {
                println!("{}", render_followup_prompt(&resp.report));
                month = next;
            }
            _ => {
                for note in &resp.notes {
                    println!("note: {note}");
                }
                print!("{}", render_statements(std::slice::from_ref(&resp.report)));
                if let Some(summary) = resp.summary {
                    println!("year complete: net income {}", summary.annual.income.net_income.grouped());
                }
                return Ok(());
            }
        }
    }
}

fn serve(cli: &Cli, addr: &str, assets: Option<PathBuf>, idle: u64) -> Result<(), String> {
    if let Some(dir) = &assets {
        if !dir.is_dir() {
            return Err(format!("asset directory {} does not exist", dir.display()));
        }
    }
    let listener = std::net::TcpListener::bind(addr).map_err(|e| format!("binding {addr}: {e}"))?;
    let local = listener.local_addr().map_err(|e| e.to_string())?;
    println!("listening on http://{local}/v1");
    let svc = Arc::new(GameService::new(store(&cli.out)?, Duration::from_secs(idle)));
    serve_blocking(listener, svc, assets).map_err(|e| e.to_string())
}

fn validate(spec: &str) -> Result<(), String> {
    let sc = scenario::resolve(spec).map_err(|e| e.to_string())?;
    println!("{}: schema {}, {} competitor months, ok", sc.id, sc.schema_version, sc.competitor.months.len());
    Ok(())
}

fn calibrate(cli: &Cli) -> Result<(), String> {
    let sc = scenario::resolve(&cli.scenario).map_err(|e| e.to_string())?;
    let cal = calibrate_calendar(&sc.params);
    println!("{:>5} {:>10} {:>8} {:>8} {:>9}", "month", "base", "target", "fitted", "residual");
    for (slot, target) in UNITS.iter().enumerate() {
        let residual = cal.residuals[slot].map_or("bulk".to_string(), |r| format!("{:.3}%", r * 100.0));
        println!(
            "{:>5} {:>10} {:>8} {:>8} {:>9}",
            slot + 1,
            cal.calendar.base_units[slot],
            target,
            cal.fitted_units[slot],
            residual
        );
    }
    let worst = cal.max_abs_residual();
    println!("max relative residual {:.3}%", worst * 100.0);
    if worst > 0.02 {
        return Err(format!("calibration residual {:.3}% exceeds 2%", worst * 100.0));
    }
    Ok(())
}

fn export(cli: &Cli, session: &str, to: Option<PathBuf>) -> Result<(), String> {
    let store = store(&cli.out)?;
    let stored = store.load(session).map_err(|e| e.to_string())?;
    let dir = to.unwrap_or_else(|| store.session_dir(session));
    let (json, csv) = export_session(&stored.to_log(), &dir).map_err(|e| e.to_string())?;
    println!("{}\n{}", json.display(), csv.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), String> {
    if let Some(path) = &cli.endpoint_env {
        load_env_file(path)?;
    }
    match &cli.command {
        Command::Bench => bench(cli),
        Command::Replay { fixture } => replay(cli, fixture),
        Command::Play { resume, player } => play(cli, resume.as_deref(), player),
        Command::Serve { addr, assets, idle_timeout } => serve(cli, addr, assets.clone(), *idle_timeout),
        Command::Validate { scenario } => validate(scenario),
        Command::Calibrate => calibrate(cli),
        Command::Export { session, to } => export(cli, session, to.clone()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { tracing::Level::INFO } else { tracing::Level::WARN };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
