use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn itnforge() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_itnforge"));
    for (k, _) in std::env::vars() {
        if k.starts_with("ITNFORGE_") {
            c.env_remove(k);
        }
    }
    c
}

fn run_with_stdin(mut cmd: Command, stdin: &[u8]) -> Output {
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("itnforge-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn normalize_streams_lines() {
    let mut cmd = itnforge();
    cmd.arg("normalize");
    let o = run_with_stdin(
        cmd,
        b"twenty one oh five\noctober twenty twenty twenty\nfour percent of five dollars is twenty cents\n",
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "2105\nOctober 20, 2020\n4% of $5 is 20 cents\n");
}

#[test]
fn denormalize_reads_files() {
    let input = scratch("written.txt");
    fs::write(&input, "October 20, 2020\n").unwrap();
    let o = itnforge().arg("denormalize").arg(&input).output().unwrap();
    assert_eq!(stdout(&o), "october twenty twenty twenty\n");
}

#[test]
fn evaluate_identity_is_all_zero() {
    let corpus = scratch("eval.tsv");
    let st = itnforge().args(["gen-data", "--templates", "50", "-o"]).arg(&corpus).status().unwrap();
    assert!(st.success());
    let hyp = scratch("eval.hyp");
    let written: String = fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().to_string() + "\n")
        .collect();
    fs::write(&hyp, written).unwrap();
    let o = itnforge().arg("evaluate").arg(&corpus).arg(&hyp).output().unwrap();
    assert!(o.status.success());
    let report = stdout(&o);
    for row in ["Overall", "Numbers", "Units", "Date Time", "Misc"] {
        let line = report.lines().find(|l| l.starts_with(row)).unwrap();
        let cols: Vec<&str> = line[10..].split_whitespace().collect();
        assert_eq!(cols[2..], ["0.0", "0.0", "0.0"], "{line}");
    }
}

#[test]
fn exit_codes() {
    let o = itnforge().args(["normalize", "/definitely/missing"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = itnforge().args(["--synthetic-ratio", "3", "gen-data", "--templates", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = itnforge().args(["--grammar", "/no/grammar", "normalize"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let mut cmd = itnforge();
    cmd.arg("normalize");
    let o = run_with_stdin(cmd, b"five\n\xff\nsix\n");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "5\n6\n");
    let mut cmd = itnforge();
    cmd.args(["--max-errors", "1", "normalize"]);
    assert_eq!(run_with_stdin(cmd, b"five\n\xff\nsix\n").status.code(), Some(0));
}

#[test]
fn env_overrides_flags() {
    let gen = |env: Option<&str>, flag: Option<&str>| {
        let mut c = itnforge();
        if let Some(s) = env {
            c.env("ITNFORGE_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        c.args(["gen-data", "--templates", "20"]);
        c.output().unwrap().stdout
    };
    assert_eq!(gen(Some("5"), None), gen(None, Some("5")));
    assert_ne!(gen(Some("5"), None), gen(None, Some("6")));
}

#[test]
fn jsonl_by_extension_and_stats() {
    let corpus = scratch("corpus.jsonl");
    let st = itnforge().args(["gen-data", "--templates", "30", "-o"]).arg(&corpus).status().unwrap();
    assert!(st.success());
    let first = fs::read_to_string(&corpus).unwrap().lines().next().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert!(v.get("classes").is_some() && v.get("provenance").is_some());
    let o = itnforge().args(["stats", "--json"]).arg(&corpus).output().unwrap();
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(stats["pairs"].as_u64().unwrap() >= 30);
}

#[test]
fn hybrid_run_with_mock_backend() {
    let mock = env!("CARGO_BIN_EXE_itnforge-mock-backend");
    let trace = scratch("trace.jsonl");
    let mut cmd = itnforge();
    cmd.args(["--threshold", "0.5", "--backend"])
        .arg(format!("{mock} --mode itn --confidence 1.7"))
        .args(["hybrid-run", "--trace"])
        .arg(&trace);
    let o = run_with_stdin(cmd, b"twenty twelve\nfour percent\n");
    assert!(o.status.success());
    assert_eq!(stdout(&o), "2012\n4%\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("clamped"));
    let t = fs::read_to_string(&trace).unwrap();
    assert_eq!(t.lines().count(), 2);
    assert!(t.lines().all(|l| l.contains("\"path\":\"neural\"") && l.contains("\"confidence\":1.0")));

    let mut cmd = itnforge();
    cmd.args(["--backend"]).arg(format!("{mock} --confidence 0.2")).arg("hybrid-run");
    let o = run_with_stdin(cmd, b"twenty twelve\n");
    assert_eq!(stdout(&o), "2012\n");
}
