//! Scriptable stand-in for a neural ITN service, speaking the line protocol
//! on stdin and stdout.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use itnforge_core::hybrid::BackendRequest;
use itnforge_core::{itn, Grammar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Return the input unchanged.
    Echo,
    /// Return the rule engine's output.
    Itn,
    /// Read requests and never answer.
    Hang,
    /// Answer `--crash-after` requests, then exit abruptly.
    Crash,
    /// Answer every request with a line that is not a record.
    Garbage,
}

#[derive(Parser, Debug)]
#[command(name = "itnforge-mock-backend", about = "Test backend for hybrid runs")]
struct Args {
    #[arg(long, value_enum, default_value_t = Mode::Echo)]
    mode: Mode,

    /// Reported confidence; not validated, so out-of-range values reach the client.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    confidence: f64,

    /// Literal substitutions applied to each answer, one `from<TAB>to` per line.
    #[arg(long)]
    script: Option<PathBuf>,

    /// Sleep before each answer.
    #[arg(long, default_value_t = 0)]
    delay_ms: u64,

    #[arg(long, default_value_t = 0)]
    crash_after: usize,

    #[arg(long)]
    grammar: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let script: Vec<(String, String)> = match &args.script {
        Some(p) => match fs::read_to_string(p) {
            Ok(text) => text
                .lines()
                .filter_map(|l| l.split_once('\t'))
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            Err(e) => {
                eprintln!("mock backend: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => Vec::new(),
    };
    let grammar = match &args.grammar {
        Some(p) => match Grammar::load(p) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("mock backend: {e}");
                return ExitCode::from(2);
            }
        },
        None => Grammar::english(),
    };
    let stdout = io::stdout();
    let mut answered = 0;
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        if args.mode == Mode::Hang {
            continue;
        }
        if args.mode == Mode::Crash && answered >= args.crash_after {
            std::process::exit(101);
        }
        if args.delay_ms > 0 {
            thread::sleep(Duration::from_millis(args.delay_ms));
        }
        let out = if args.mode == Mode::Garbage {
            "<<not a record>>".to_string()
        } else {
            let req: BackendRequest = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("mock backend: bad request: {e}");
                    continue;
                }
            };
            let mut text = match args.mode {
                Mode::Itn => itn(&grammar, &req.text),
                _ => req.text,
            };
            for (from, to) in &script {
                text = text.replace(from.as_str(), to);
            }
            serde_json::json!({"id": req.id, "text": text, "confidence": args.confidence}).to_string()
        };
        let mut w = stdout.lock();
        if writeln!(w, "{out}").and_then(|_| w.flush()).is_err() {
            break;
        }
        answered += 1;
    }
    ExitCode::SUCCESS
}
