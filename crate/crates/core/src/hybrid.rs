//! Neural first pass behind a line protocol, confidence switch, rule second
//! pass.
//!
//! A backend receives `{"id": N, "text": "..."}` lines and answers with
//! `{"id": N, "text": "...", "confidence": C}`. Responses are matched by id.
//! Any timeout, crash or malformed record sends the sentence down the rule
//! path, so [`Hybrid::run`] always produces a written-form string.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::Grammar;
use crate::itn::itn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub id: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackendResponse {
    pub text: String,
    pub confidence: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    id: u64,
    text: String,
    confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend did not answer request {0} in time")]
    Timeout(u64),
    #[error("malformed backend record: {0}")]
    Protocol(String),
    #[error("backend unavailable: {0}")]
    Unavailable(String),
}

/// Where the backend lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// Program and arguments; talks over the child's stdin and stdout.
    Command(Vec<String>),
    /// `tcp:HOST:PORT`
    Tcp(String),
    /// `unix:PATH`
    Unix(String),
}

impl Endpoint {
    /// `tcp:` and `unix:` prefixes select sockets; anything else is a
    /// whitespace-separated command line.
    pub fn parse(s: &str) -> Option<Endpoint> {
        let s = s.trim();
        if let Some(addr) = s.strip_prefix("tcp:") {
            return Some(Endpoint::Tcp(addr.to_string()));
        }
        if let Some(path) = s.strip_prefix("unix:") {
            return Some(Endpoint::Unix(path.to_string()));
        }
        let argv: Vec<String> = s.split_whitespace().map(str::to_string).collect();
        (!argv.is_empty()).then_some(Endpoint::Command(argv))
    }

    pub fn connect(&self) -> Result<LineBackend, BackendError> {
        let unavailable = |e: std::io::Error| BackendError::Unavailable(format!("{self}: {e}"));
        match self {
            Endpoint::Command(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(unavailable)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                let mut b = LineBackend::new(stdin, stdout);
                b.child = Some(child);
                Ok(b)
            }
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr).map_err(unavailable)?;
                let reader = stream.try_clone().map_err(unavailable)?;
                let shutdown = stream.try_clone().map_err(unavailable)?;
                let mut b = LineBackend::new(stream, reader);
                b.on_drop = Some(Box::new(move || {
                    let _ = shutdown.shutdown(std::net::Shutdown::Both);
                }));
                Ok(b)
            }
            #[cfg(unix)]
            Endpoint::Unix(path) => {
                use std::os::unix::net::UnixStream;
                let stream = UnixStream::connect(path).map_err(unavailable)?;
                let reader = stream.try_clone().map_err(unavailable)?;
                let shutdown = stream.try_clone().map_err(unavailable)?;
                let mut b = LineBackend::new(stream, reader);
                b.on_drop = Some(Box::new(move || {
                    let _ = shutdown.shutdown(std::net::Shutdown::Both);
                }));
                Ok(b)
            }
            #[cfg(not(unix))]
            Endpoint::Unix(_) => Err(BackendError::Unavailable("unix sockets are not supported here".into())),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Command(argv) => write!(f, "{}", argv.join(" ")),
            Endpoint::Tcp(a) => write!(f, "tcp:{a}"),
            Endpoint::Unix(p) => write!(f, "unix:{p}"),
        }
    }
}

/// A neural ITN service. Requests may be submitted ahead of waiting on them.
pub trait Backend: Send {
    fn submit(&mut self, id: u64, text: &str) -> Result<(), BackendError>;

    /// Blocks until the response for `id` arrives or `deadline` passes.
    fn wait(&mut self, id: u64, deadline: Instant) -> Result<BackendResponse, BackendError>;

    fn roundtrip(&mut self, id: u64, text: &str, timeout: Duration) -> Result<BackendResponse, BackendError> {
        self.submit(id, text)?;
        self.wait(id, Instant::now() + timeout)
    }
}

enum Event {
    Line(String),
    Closed(String),
}

/// [`Backend`] over any line-oriented byte stream pair. Writes and reads
/// happen on helper threads so a stuck peer can never block the caller past
/// its deadline.
pub struct LineBackend {
    to_writer: Option<mpsc::Sender<String>>,
    events: mpsc::Receiver<Event>,
    stash: HashMap<u64, Result<BackendResponse, BackendError>>,
    outstanding: BTreeSet<u64>,
    closed: Option<String>,
    child: Option<Child>,
    on_drop: Option<Box<dyn FnOnce() + Send>>,
}

impl LineBackend {
    pub fn new<W, R>(mut writer: W, reader: R) -> LineBackend
    where
        W: Write + Send + 'static,
        R: Read + Send + 'static,
    {
        let (to_writer, lines) = mpsc::channel::<String>();
        thread::spawn(move || {
            for line in lines {
                if writeln!(writer, "{line}").and_then(|_| writer.flush()).is_err() {
                    break;
                }
            }
        });
        let (tx, events) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(reader);
            let mut buf = String::new();
            loop {
                buf.clear();
                match reader.read_line(&mut buf) {
                    Ok(0) => {
                        let _ = tx.send(Event::Closed("backend closed its output".into()));
                        break;
                    }
                    Ok(_) => {
                        if tx.send(Event::Line(buf.trim_end().to_string())).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Event::Closed(e.to_string()));
                        break;
                    }
                }
            }
        });
        LineBackend {
            to_writer: Some(to_writer),
            events,
            stash: HashMap::new(),
            outstanding: BTreeSet::new(),
            closed: None,
            child: None,
            on_drop: None,
        }
    }

    /// Files one incoming line. Records without a readable id are charged to
    /// the request currently awaited.
    fn absorb(&mut self, line: &str, awaited: u64) {
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                self.stash.insert(awaited, Err(BackendError::Protocol(format!("{e}: {line:?}"))));
                return;
            }
        };
        let id = value.get("id").and_then(serde_json::Value::as_u64);
        let parsed: Result<WireResponse, _> = serde_json::from_value(value);
        let (id, result) = match (parsed, id) {
            (Ok(r), _) => (r.id, Ok(clamp(r))),
            (Err(e), Some(id)) => (id, Err(BackendError::Protocol(format!("{e}: {line:?}")))),
            (Err(e), None) => (awaited, Err(BackendError::Protocol(format!("{e}: {line:?}")))),
        };
        if self.outstanding.contains(&id) {
            self.stash.insert(id, result);
        } else {
            log::debug!("dropping backend record for unknown id {id}");
        }
    }

    fn settle(&mut self, id: u64, r: Result<BackendResponse, BackendError>) -> Result<BackendResponse, BackendError> {
        self.outstanding.remove(&id);
        self.stash.remove(&id);
        r
    }
}

fn clamp(r: WireResponse) -> BackendResponse {
    let confidence = if (0.0..=1.0).contains(&r.confidence) {
        r.confidence
    } else {
        log::warn!("backend confidence {} for request {} clamped into [0, 1]", r.confidence, r.id);
        r.confidence.clamp(0.0, 1.0)
    };
    BackendResponse {
        text: r.text,
        confidence,
    }
}

impl Backend for LineBackend {
    fn submit(&mut self, id: u64, text: &str) -> Result<(), BackendError> {
        if let Some(reason) = &self.closed {
            return Err(BackendError::Unavailable(reason.clone()));
        }
        let line = serde_json::to_string(&BackendRequest {
            id,
            text: text.to_string(),
        })
        .expect("requests always serialize");
        let sent = self.to_writer.as_ref().is_some_and(|tx| tx.send(line).is_ok());
        if !sent {
            self.closed = Some("backend input closed".into());
            return Err(BackendError::Unavailable("backend input closed".into()));
        }
        self.outstanding.insert(id);
        Ok(())
    }

    fn wait(&mut self, id: u64, deadline: Instant) -> Result<BackendResponse, BackendError> {
        loop {
            if let Some(r) = self.stash.remove(&id) {
                return self.settle(id, r);
            }
            if let Some(reason) = self.closed.clone() {
                return self.settle(id, Err(BackendError::Unavailable(reason)));
            }
            let now = Instant::now();
            if now >= deadline {
                return self.settle(id, Err(BackendError::Timeout(id)));
            }
            match self.events.recv_timeout(deadline - now) {
                Ok(Event::Line(line)) => self.absorb(&line, id),
                Ok(Event::Closed(reason)) => self.closed = Some(reason),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => self.closed = Some("backend reader stopped".into()),
            }
        }
    }
}

impl Drop for LineBackend {
    fn drop(&mut self) {
        self.to_writer = None;
        if let Some(f) = self.on_drop.take() {
            f();
        }
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorrectionRule {
    pub pattern: Regex,
    pub replacement: String,
}

impl CorrectionRule {
    pub fn new(pattern: &str, replacement: &str) -> Result<CorrectionRule, regex::Error> {
        Ok(CorrectionRule {
            pattern: Regex::new(pattern)?,
            replacement: replacement.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error("timeout must be positive")]
    Timeout,
    #[error("max_in_flight must be positive")]
    InFlight,
}

#[derive(Debug, Clone)]
pub struct HybridConfig {
    threshold: f64,
    pub endpoint: Option<Endpoint>,
    timeout: Duration,
    pub correction_rules: Vec<CorrectionRule>,
    max_in_flight: usize,
}

impl HybridConfig {
    pub fn new(threshold: f64, timeout: Duration) -> Result<HybridConfig, ConfigError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(ConfigError::Threshold(threshold));
        }
        if timeout.is_zero() {
            return Err(ConfigError::Timeout);
        }
        Ok(HybridConfig {
            threshold,
            endpoint: None,
            timeout,
            correction_rules: Vec::new(),
            max_in_flight: 16,
        })
    }

    pub fn with_endpoint(mut self, endpoint: Endpoint) -> HybridConfig {
        self.endpoint = Some(endpoint);
        self
    }

    pub fn with_rules(mut self, rules: Vec<CorrectionRule>) -> HybridConfig {
        self.correction_rules = rules;
        self
    }

    /// Requests submitted before the first response is awaited.
    pub fn with_max_in_flight(mut self, n: usize) -> Result<HybridConfig, ConfigError> {
        if n == 0 {
            return Err(ConfigError::InFlight);
        }
        self.max_in_flight = n;
        Ok(self)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }
}

/// Which path produced the output.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum Decision {
    Neural { confidence: f64 },
    BelowThreshold { confidence: f64 },
    BackendFailed { reason: String },
    NoBackend,
}

impl Decision {
    pub fn is_neural(&self) -> bool {
        matches!(self, Decision::Neural { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridOutput {
    pub text: String,
    pub decision: Decision,
}

/// Correction rules in order, then the rule engine.
pub fn second_pass(cfg: &HybridConfig, g: &Grammar, text: &str) -> String {
    let mut s = text.to_string();
    for rule in &cfg.correction_rules {
        s = rule.pattern.replace_all(&s, rule.replacement.as_str()).into_owned();
    }
    itn(g, &s)
}

fn decide(cfg: &HybridConfig, g: &Grammar, spoken: &str, response: Result<BackendResponse, BackendError>) -> HybridOutput {
    match response {
        Ok(r) if r.confidence >= cfg.threshold => HybridOutput {
            text: second_pass(cfg, g, &r.text),
            decision: Decision::Neural {
                confidence: r.confidence,
            },
        },
        Ok(r) => HybridOutput {
            text: itn(g, spoken),
            decision: Decision::BelowThreshold {
                confidence: r.confidence,
            },
        },
        Err(e) => {
            log::warn!("falling back to rules: {e}");
            HybridOutput {
                text: itn(g, spoken),
                decision: Decision::BackendFailed { reason: e.to_string() },
            }
        }
    }
}

/// One sentence through the hybrid. `id` tags the backend request.
pub fn hybrid_itn(
    cfg: &HybridConfig,
    g: &Grammar,
    backend: Option<&mut dyn Backend>,
    id: u64,
    spoken: &str,
) -> HybridOutput {
    match backend {
        None => HybridOutput {
            text: itn(g, spoken),
            decision: Decision::NoBackend,
        },
        Some(b) => {
            let r = b.roundtrip(id, spoken, cfg.timeout);
            decide(cfg, g, spoken, r)
        }
    }
}

/// Hybrid orchestrator owning its backend connection.
pub struct Hybrid<'g> {
    cfg: HybridConfig,
    g: &'g Grammar,
    backend: Option<Box<dyn Backend>>,
    next_id: u64,
}

impl<'g> Hybrid<'g> {
    pub fn new(cfg: HybridConfig, g: &'g Grammar, backend: Option<Box<dyn Backend>>) -> Hybrid<'g> {
        Hybrid {
            cfg,
            g,
            backend,
            next_id: 0,
        }
    }

    /// Connects to `cfg.endpoint`. A failed connection is logged and leaves
    /// the orchestrator rule-only.
    pub fn connect(cfg: HybridConfig, g: &'g Grammar) -> Hybrid<'g> {
        let backend = cfg.endpoint.as_ref().and_then(|e| match e.connect() {
            Ok(b) => Some(Box::new(b) as Box<dyn Backend>),
            Err(err) => {
                log::warn!("{err}");
                None
            }
        });
        Hybrid::new(cfg, g, backend)
    }

    pub fn config(&self) -> &HybridConfig {
        &self.cfg
    }

    pub fn run(&mut self, spoken: &str) -> HybridOutput {
        let id = self.next_id;
        self.next_id += 1;
        hybrid_itn(&self.cfg, self.g, self.backend.as_mut().map(|b| b.as_mut() as &mut dyn Backend), id, spoken)
    }

    /// Pipelines up to `max_in_flight` requests at a time. Output order is
    /// input order.
    pub fn run_batch<S: AsRef<str>>(&mut self, inputs: &[S]) -> Vec<HybridOutput> {
        let Some(backend) = self.backend.as_deref_mut() else {
            return inputs.iter().map(|s| hybrid_itn(&self.cfg, self.g, None, 0, s.as_ref())).collect();
        };
        let mut out = Vec::with_capacity(inputs.len());
        for window in inputs.chunks(self.cfg.max_in_flight) {
            let start = Instant::now();
            let submitted: Vec<(u64, Result<(), BackendError>)> = window
                .iter()
                .map(|s| {
                    let id = self.next_id;
                    self.next_id += 1;
                    (id, backend.submit(id, s.as_ref()))
                })
                .collect();
            for ((id, sub), s) in submitted.into_iter().zip(window) {
                let r = sub.and_then(|_| backend.wait(id, start + self.cfg.timeout));
                out.push(decide(&self.cfg, self.g, s.as_ref(), r));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::TcpListener;

    /// Answers from a fixed transcript of (text, confidence).
    struct Transcript {
        answers: Vec<(String, f64)>,
        pending: Vec<u64>,
    }

    impl Backend for Transcript {
        fn submit(&mut self, id: u64, _text: &str) -> Result<(), BackendError> {
            self.pending.push(id);
            Ok(())
        }

        fn wait(&mut self, id: u64, _deadline: Instant) -> Result<BackendResponse, BackendError> {
            let (text, confidence) = self.answers[id as usize % self.answers.len()].clone();
            Ok(BackendResponse { text, confidence })
        }
    }

    fn cfg(threshold: f64) -> HybridConfig {
        HybridConfig::new(threshold, Duration::from_millis(300)).unwrap()
    }

    fn transcript(answers: &[(&str, f64)]) -> Transcript {
        Transcript {
            answers: answers.iter().map(|(t, c)| (t.to_string(), *c)).collect(),
            pending: vec![],
        }
    }

    #[test]
    fn confidence_switch() {
        let g = Grammar::english();
        let spoken = "it was priced at three thousand six hundred forty nine point eight four dollars";
        let mut b = transcript(&[("it was priced at $3649.84 or five percent less", 0.9)]);
        let hi = hybrid_itn(&cfg(0.5), &g, Some(&mut b), 0, spoken);
        assert!(hi.decision.is_neural());
        assert_eq!(hi.text, "it was priced at $3649.84 or 5% less");
        let mut b = transcript(&[("garbage", 0.2)]);
        let lo = hybrid_itn(&cfg(0.5), &g, Some(&mut b), 0, spoken);
        assert_eq!(lo.decision, Decision::BelowThreshold { confidence: 0.2 });
        assert_eq!(lo.text, "it was priced at $3649.84");
    }

    #[test]
    fn written_neural_output_is_left_alone() {
        let g = Grammar::english();
        let mut b = transcript(&[("it was priced at $3649.84", 1.0)]);
        let out = hybrid_itn(&cfg(0.5), &g, Some(&mut b), 0, "whatever");
        assert_eq!(out.text, "it was priced at $3649.84");
    }

    #[test]
    fn correction_rules_run_before_rules() {
        let g = Grammar::english();
        let c = cfg(0.0).with_rules(vec![CorrectionRule::new(r"(\d) \$(\d)", "$1$2").unwrap()]);
        assert_eq!(second_pass(&c, &g, "3006 4 $9.84 and five percent"), "3006 49.84 and 5%");
    }

    #[test]
    fn config_bounds() {
        assert!(HybridConfig::new(1.2, Duration::from_secs(1)).is_err());
        assert!(HybridConfig::new(0.5, Duration::ZERO).is_err());
        assert!(cfg(0.5).with_max_in_flight(0).is_err());
        assert_eq!(Endpoint::parse("tcp:127.0.0.1:9"), Some(Endpoint::Tcp("127.0.0.1:9".into())));
        assert_eq!(Endpoint::parse("mock --confidence 1"), Some(Endpoint::Command(vec!["mock".into(), "--confidence".into(), "1".into()])));
        assert_eq!(Endpoint::parse("  "), None);
    }

    /// Serves one connection, answering each request line with `answer`.
    fn serve(answer: impl Fn(BackendRequest) -> Option<String> + Send + 'static) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut w = stream.try_clone().unwrap();
            for line in BufReader::new(stream).lines() {
                let Ok(line) = line else { break };
                let req: BackendRequest = serde_json::from_str(&line).unwrap();
                match answer(req) {
                    Some(out) => {
                        if writeln!(w, "{out}").is_err() {
                            break;
                        }
                    }
                    None => thread::sleep(Duration::from_secs(5)),
                }
            }
        });
        format!("tcp:{addr}")
    }

    #[test]
    fn socket_echo_and_clamp() {
        let ep = Endpoint::parse(&serve(|r| {
            Some(serde_json::json!({"id": r.id, "text": r.text, "confidence": 1.7}).to_string())
        }))
        .unwrap();
        let mut b = ep.connect().unwrap();
        let r = b.roundtrip(3, "hello", Duration::from_secs(2)).unwrap();
        assert_eq!(r, BackendResponse { text: "hello".into(), confidence: 1.0 });
    }

    #[test]
    fn out_of_order_responses_match_by_id() {
        let ep = Endpoint::parse(&serve(|r| {
            Some(serde_json::json!({"id": r.id, "text": format!("#{}", r.id), "confidence": 0.5}).to_string())
        }))
        .unwrap();
        let mut b = ep.connect().unwrap();
        for id in 0..5 {
            b.submit(id, "x").unwrap();
        }
        let deadline = Instant::now() + Duration::from_secs(2);
        for id in (0..5).rev() {
            assert_eq!(b.wait(id, deadline).unwrap().text, format!("#{id}"));
        }
    }

    #[test]
    fn garbage_and_silence_fall_back() {
        let g = Grammar::english();
        let ep = Endpoint::parse(&serve(|r| Some(if r.id % 2 == 0 { "{not json".into() } else { r#"{"id": 1, "text": null, "confidence": 1}"#.into() }))).unwrap();
        let mut h = Hybrid::new(cfg(0.0), &g, Some(Box::new(ep.connect().unwrap())));
        let outs = h.run_batch(&["four percent", "five dollars"]);
        assert_eq!(outs[0].text, "4%");
        assert_eq!(outs[1].text, "$5");
        assert!(outs.iter().all(|o| matches!(o.decision, Decision::BackendFailed { .. })));

        let ep = Endpoint::parse(&serve(|_| None)).unwrap();
        let mut h = Hybrid::new(cfg(0.0), &g, Some(Box::new(ep.connect().unwrap())));
        let t = Instant::now();
        let outs = h.run_batch(&["one", "two", "three"]);
        assert!(t.elapsed() < Duration::from_secs(2));
        assert_eq!(outs.iter().map(|o| o.text.as_str()).collect::<Vec<_>>(), ["1", "2", "3"]);
    }

    #[test]
    fn unreachable_endpoint_is_rule_only() {
        let g = Grammar::english();
        let c = cfg(0.5).with_endpoint(Endpoint::Command(vec!["/nonexistent/backend".into()]));
        let mut h = Hybrid::connect(c, &g);
        assert_eq!(h.run("twenty twelve"), HybridOutput { text: "2012".into(), decision: Decision::NoBackend });
    }

    proptest::proptest! {
        #[test]
        fn raising_threshold_never_adds_neural(confs in proptest::collection::vec(0.0f64..=1.0, 1..20), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            let g = Grammar::english();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let answers: Vec<(&str, f64)> = confs.iter().map(|&c| ("two", c)).collect();
            let count = |t: f64| {
                let mut h = Hybrid::new(cfg(t), &g, Some(Box::new(transcript(&answers))));
                h.run_batch(&vec!["one"; answers.len()]).iter().filter(|o| o.decision.is_neural()).count()
            };
            proptest::prop_assert!(count(hi) <= count(lo));
            let top = confs.iter().cloned().fold(0.0, f64::max);
            if top < 1.0 {
                let t = (top + 1.0) / 2.0;
                let mut h = Hybrid::new(cfg(t), &g, Some(Box::new(transcript(&answers))));
                for o in h.run_batch(&vec!["one"; answers.len()]) {
                    proptest::prop_assert_eq!(o.text, itn(&g, "one"));
                }
            }
        }
    }
}
