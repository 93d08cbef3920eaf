//! `itnforge`: line-oriented front end for the ITN toolkit.
//!
//! Every flag can also be set through an `ITNFORGE_*` environment variable
//! (`ITNFORGE_GRAMMAR`, `ITNFORGE_SEED`, `ITNFORGE_SYNTHETIC_RATIO`,
//! `ITNFORGE_THRESHOLD`, `ITNFORGE_BACKEND`, `ITNFORGE_FORMAT`,
//! `ITNFORGE_JOBS`, `ITNFORGE_MAX_ERRORS`). Log verbosity follows
//! `ITNFORGE_LOG` (default `warn`).
//!
//! Exit status is 0 on success, 1 when more records failed than
//! `--max-errors` allows and 2 on configuration errors.

mod lines;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use itnforge_core::align::tag_itn;
use itnforge_core::datagen::{corpus_stats, CorpusBuilder, ParallelPair, TemplateConfig, TemplateGenerator};
use itnforge_core::hybrid::{CorrectionRule, Endpoint, Hybrid, HybridConfig};
use itnforge_core::metrics::{accumulate_usecases, score_sentence, EvalReport, Usecase};
use itnforge_core::text::{tokenize, SemioticClass, Sentence};
use itnforge_core::{itn, tn, Grammar};

use lines::{map_lines, Record};

#[derive(Parser, Debug)]
#[command(name = "itnforge", version, about = "Inverse text normalization toolkit")]
struct Cli {
    /// Lexicon file or directory of *.toml lexicons. Defaults to the bundled English grammar.
    #[arg(long, global = true, env = "ITNFORGE_GRAMMAR")]
    grammar: Option<PathBuf>,

    #[arg(long, global = true, env = "ITNFORGE_SEED", default_value_t = 0)]
    seed: u64,

    /// Probability that a cardinal-bearing line also yields a synthetic variant.
    #[arg(long, global = true, env = "ITNFORGE_SYNTHETIC_RATIO", default_value_t = 0.1)]
    synthetic_ratio: f64,

    /// Minimum backend confidence for the neural path.
    #[arg(long, global = true, env = "ITNFORGE_THRESHOLD", default_value_t = 0.5)]
    threshold: f64,

    /// Backend command line, `tcp:HOST:PORT` or `unix:PATH`.
    #[arg(long, global = true, env = "ITNFORGE_BACKEND")]
    backend: Option<String>,

    /// Corpus format. Inferred from the file extension when absent.
    #[arg(long, global = true, env = "ITNFORGE_FORMAT")]
    format: Option<Format>,

    #[arg(long, global = true, env = "ITNFORGE_JOBS", default_value_t = 1)]
    jobs: usize,

    /// Failed records tolerated before exiting with status 1.
    #[arg(long, global = true, env = "ITNFORGE_MAX_ERRORS", default_value_t = 0)]
    max_errors: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Jsonl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spoken lines to written lines.
    Normalize {
        /// Input file; stdin when absent or `-`.
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Written lines to spoken lines.
    Denormalize {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a parallel corpus from written lines.
    GenData {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Generate this many template sentences instead of reading input.
        #[arg(long, conflicts_with = "input")]
        templates: Option<usize>,
    },
    /// Score hypotheses against a corpus.
    Evaluate {
        /// Corpus with spoken, written and provenance columns.
        corpus: PathBuf,
        /// One hypothesis line per corpus record.
        hyp: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Neural backend with rule fallback.
    HybridRun {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        timeout_ms: u64,
        /// Correction rules, one `pattern<TAB>replacement` per line.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Write one JSON decision record per input line here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Density, class and provenance counts for a corpus.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Config(anyhow::Error),
    Records { failed: usize, cap: usize },
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Config(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Config(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ITNFORGE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Records { failed, cap }) => {
            eprintln!("error: {failed} records failed (limit {cap})");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn open_input(path: Option<&Path>) -> anyhow::Result<Box<dyn BufRead>> {
    match path {
        None => Ok(Box::new(io::stdin().lock())),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(io::stdin().lock())),
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            Ok(Box::new(BufReader::new(f)))
        }
    }
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn corpus_format(explicit: Option<Format>, path: Option<&Path>) -> Format {
    explicit.unwrap_or_else(|| match path.and_then(Path::extension).and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => Format::Jsonl,
        _ => Format::Tsv,
    })
}

fn check_cap(failed: usize, cap: usize) -> Result<(), Failure> {
    if failed > cap {
        Err(Failure::Records { failed, cap })
    } else {
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.jobs == 0 {
        return Err(anyhow!("--jobs must be at least 1").into());
    }
    let grammar = match &cli.grammar {
        Some(p) => Grammar::load(p).with_context(|| format!("loading grammar {}", p.display()))?,
        None => Grammar::english(),
    };
    let g = &grammar;
    match &cli.command {
        Command::Normalize { input, output } => {
            let mut out = open_output(output.as_deref())?;
            let failed = map_lines(open_input(input.as_deref())?, cli.jobs, |_, line| itn(g, line), |s| {
                writeln!(out, "{s}")
            })?;
            out.flush()?;
            check_cap(failed, cli.max_errors)
        }
        Command::Denormalize { input, output } => {
            let mut out = open_output(output.as_deref())?;
            let spoken = |_: usize, line: &str| {
                let r = tn(g, line);
                r.spoken.tokens.iter().map(|t| t.surface()).collect::<Vec<_>>().join(" ")
            };
            let failed = map_lines(open_input(input.as_deref())?, cli.jobs, spoken, |s| writeln!(out, "{s}"))?;
            out.flush()?;
            check_cap(failed, cli.max_errors)
        }
        Command::GenData {
            input,
            output,
            templates,
        } => gen_data(cli, g, input.as_deref(), output.as_deref(), *templates),
        Command::Evaluate { corpus, hyp, json } => evaluate(cli, g, corpus, hyp, *json),
        Command::HybridRun {
            input,
            output,
            timeout_ms,
            rules,
            trace,
        } => hybrid_run(cli, g, input.as_deref(), output.as_deref(), *timeout_ms, rules.as_deref(), trace.as_deref()),
        Command::Stats { corpus, json } => stats(cli, corpus, *json),
    }
}

fn gen_data(
    cli: &Cli,
    g: &Grammar,
    input: Option<&Path>,
    output: Option<&Path>,
    templates: Option<usize>,
) -> Result<(), Failure> {
    let builder = CorpusBuilder::new(g, cli.seed, cli.synthetic_ratio).context("--synthetic-ratio")?;
    let format = corpus_format(cli.format, output);
    let mut out = open_output(output)?;
    let process = |i: usize, line: &str| builder.process_line(i, line);
    let mut failed = 0;
    let mut sink = |r: Result<Vec<ParallelPair>, _>| -> io::Result<()> {
        match r {
            Ok(pairs) => {
                for p in pairs {
                    match format {
                        Format::Tsv => writeln!(out, "{}", p.to_tsv())?,
                        Format::Jsonl => writeln!(out, "{}", p.to_jsonl())?,
                    }
                }
            }
            Err(e) => {
                log::warn!("skipping: {e}");
                failed += 1;
            }
        }
        Ok(())
    };
    let unreadable = match templates {
        Some(n) => {
            let gen = TemplateGenerator::new(g, cli.seed, TemplateConfig::default());
            let text: String = (0..n).map(|i| gen.sentence(i) + "\n").collect();
            map_lines(text.as_bytes(), cli.jobs, process, &mut sink)?
        }
        None => map_lines(open_input(input)?, cli.jobs, process, &mut sink)?,
    };
    out.flush()?;
    check_cap(failed + unreadable, cli.max_errors)
}

fn read_corpus(path: &Path, format: Format) -> anyhow::Result<(Vec<ParallelPair>, usize)> {
    let reader = open_input(Some(path))?;
    let mut pairs = Vec::new();
    let mut failed = 0;
    for (i, line) in reader.split(b'\n').enumerate() {
        let Record::Line(line) = Record::decode(line?) else {
            failed += 1;
            continue;
        };
        if line.trim().is_empty() {
            continue;
        }
        let parsed = match format {
            Format::Tsv => ParallelPair::from_tsv(&line),
            Format::Jsonl => ParallelPair::from_jsonl(&line),
        };
        match parsed {
            Ok(p) => pairs.push(p),
            Err(e) => {
                log::warn!("{}:{}: {e}", path.display(), i + 1);
                failed += 1;
            }
        }
    }
    Ok((pairs, failed))
}

/// Classes of the spoken side, when the record does not carry them.
fn classes_of(g: &Grammar, p: &ParallelPair) -> Vec<SemioticClass> {
    if !p.classes.is_empty() {
        return p.classes.clone();
    }
    itnforge_core::itn::tag(g, &tokenize(&p.spoken)).into_iter().map(|s| s.class).collect()
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{:.1}", v * 100.0))
}

fn evaluate(cli: &Cli, g: &Grammar, corpus: &Path, hyp: &Path, json: bool) -> Result<(), Failure> {
    let (pairs, mut failed) = read_corpus(corpus, corpus_format(cli.format, Some(corpus)))?;
    let hyps: Vec<String> = open_input(Some(hyp))?
        .lines()
        .collect::<io::Result<_>>()
        .with_context(|| format!("reading {}", hyp.display()))?;
    if hyps.len() != pairs.len() {
        return Err(anyhow!("{} has {} lines but the corpus has {} records", hyp.display(), hyps.len(), pairs.len()).into());
    }
    let mut overall = EvalReport::default();
    let mut by_usecase: BTreeMap<Usecase, EvalReport> = BTreeMap::new();
    for (p, h) in pairs.iter().zip(&hyps) {
        let reference = tag_itn(&Sentence::words(&p.spoken), &Sentence::words(&p.written));
        match score_sentence(&reference, &Sentence::words(h)) {
            Ok(r) => {
                overall += r;
                accumulate_usecases(&mut by_usecase, classes_of(g, p), r);
            }
            Err(e) => {
                log::warn!("record {:?}: {e}", p.written);
                failed += 1;
            }
        }
    }
    let mut out = open_output(None)?;
    if json {
        let rows: BTreeMap<String, EvalReport> = by_usecase.iter().map(|(u, r)| (u.to_string(), *r)).collect();
        let doc = serde_json::json!({ "overall": overall, "usecases": rows });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).context("serializing report")?)?;
    } else {
        writeln!(out, "{:<10} {:>8} {:>8} {:>7} {:>7} {:>7}", "", "words", "itn", "WER", "I-WER", "NI-WER")?;
        let row = |out: &mut dyn Write, name: &str, r: &EvalReport| {
            writeln!(
                out,
                "{:<10} {:>8} {:>8} {:>7} {:>7} {:>7}",
                name,
                r.ref_words,
                r.ref_itn_words,
                pct(r.wer),
                pct(r.i_wer),
                pct(r.ni_wer)
            )
        };
        row(&mut out, "Overall", &overall)?;
        for u in Usecase::ALL {
            row(&mut out, &u.to_string(), by_usecase.get(&u).unwrap_or(&EvalReport::default()))?;
        }
    }
    out.flush()?;
    check_cap(failed, cli.max_errors)
}

fn read_rules(path: &Path) -> anyhow::Result<Vec<CorrectionRule>> {
    let mut rules = Vec::new();
    for (i, line) in open_input(Some(path))?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (pattern, replacement) = line
            .split_once('\t')
            .ok_or_else(|| anyhow!("{}:{}: expected pattern<TAB>replacement", path.display(), i + 1))?;
        rules.push(
            CorrectionRule::new(pattern, replacement).with_context(|| format!("{}:{}", path.display(), i + 1))?,
        );
    }
    Ok(rules)
}

fn hybrid_run(
    cli: &Cli,
    g: &Grammar,
    input: Option<&Path>,
    output: Option<&Path>,
    timeout_ms: u64,
    rules: Option<&Path>,
    trace: Option<&Path>,
) -> Result<(), Failure> {
    let mut cfg = HybridConfig::new(cli.threshold, Duration::from_millis(timeout_ms)).context("hybrid configuration")?;
    if let Some(b) = &cli.backend {
        cfg = cfg.with_endpoint(Endpoint::parse(b).ok_or_else(|| anyhow!("empty --backend"))?);
    }
    if let Some(r) = rules {
        cfg = cfg.with_rules(read_rules(r)?);
    }
    let mut hybrid = Hybrid::connect(cfg, g);
    let mut out = open_output(output)?;
    let mut trace = trace.map(|p| open_output(Some(p))).transpose()?;
    let mut failed = 0;
    let mut batch: Vec<String> = Vec::new();
    let mut flush = |batch: &mut Vec<String>, out: &mut dyn Write, trace: &mut Option<Box<dyn Write>>| -> io::Result<()> {
        for o in hybrid.run_batch(batch) {
            writeln!(out, "{}", o.text)?;
            if let Some(t) = trace.as_mut() {
                writeln!(t, "{}", serde_json::to_string(&o.decision).expect("decisions serialize"))?;
            }
        }
        batch.clear();
        Ok(())
    };
    for line in open_input(input)?.split(b'\n') {
        match Record::decode(line?) {
            Record::Line(l) => batch.push(l),
            Record::Invalid => failed += 1,
        }
        if batch.len() >= 64 {
            flush(&mut batch, &mut out, &mut trace)?;
        }
    }
    flush(&mut batch, &mut out, &mut trace)?;
    out.flush()?;
    if let Some(t) = trace.as_mut() {
        t.flush()?;
    }
    check_cap(failed, cli.max_errors)
}

fn stats(cli: &Cli, corpus: &Path, json: bool) -> Result<(), Failure> {
    let (pairs, failed) = read_corpus(corpus, corpus_format(cli.format, Some(corpus)))?;
    let st = corpus_stats(&pairs);
    let mut out = open_output(None)?;
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&st).context("serializing stats")?)?;
    } else {
        writeln!(out, "pairs\t{}", st.pairs)?;
        for (p, n) in &st.by_provenance {
            writeln!(out, "{p}\t{n}")?;
        }
        writeln!(out, "written_words\t{}", st.written_words)?;
        writeln!(out, "itn_words\t{}", st.itn_words)?;
        writeln!(out, "density\t{}", pct(st.density))?;
        for (c, n) in &st.class_counts {
            writeln!(out, "class.{}\t{n}", c.name())?;
        }
    }
    out.flush()?;
    check_cap(failed, cli.max_errors)
}
