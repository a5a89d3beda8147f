use std::io::Write;
use std::process::{Command, Output, Stdio};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retail-sim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_accepts_builtins_and_rejects_unknown_ids() {
    let ok = cli(&["validate", "default"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("ok"));

    let bad = cli(&["validate", "no-such-scenario"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown scenario"));
}

#[test]
fn calibrate_prints_twelve_baselines_within_tolerance() {
    let o = cli(&["calibrate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = text.lines().filter(|l| l.split_whitespace().next().is_some_and(|w| w.parse::<u32>().is_ok())).count();
    assert_eq!(rows, 12);
    assert!(text.contains("max relative residual"));
}

#[test]
fn replay_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cli(&["--out", out, "replay", "mistral"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let session = dir.path().join("sessions/mistral-ai-default-s0");
    assert!(session.join("month-12.json").exists());
    assert!(session.join("summary.json").exists());

    let dest = dir.path().join("export");
    let o = cli(&["--out", out, "export", "mistral-ai-default-s0", "--to", dest.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(dest.join("mistral-ai-default-s0.csv").exists());

    assert!(!cli(&["--out", out, "export", "missing"]).status.success());
    assert!(!cli(&["--out", out, "replay", "gemini-pro"]).status.success());
}

#[test]
fn bench_writes_a_leaderboard() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("bench.toml");
    std::fs::write(&manifest, "[[agents]]\nkind = \"heuristic\"\nname = \"heuristic\"\n\n[[agents]]\nkind = \"replay\"\nname = \"Grok\"\nfixture = \"grok\"\n").unwrap();
    let o = cli(&[
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--workers",
        "2",
        "bench",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("leaderboard.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(!cli(&["bench"]).status.success());
}

#[test]
fn play_reads_decisions_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_retail-sim"))
        .args(["--out", dir.path().to_str().unwrap(), "play"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = String::from("what should I do?\n\n");
    for _ in 0..12 {
        input.push_str("Your order in units: 3000\nYour price per unit: 110\n\n");
    }
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("year complete"));
}
