//! Declarative lexicon files and the compiled, immutable [`Grammar`].
//!
//! Lexicons are TOML documents. Every document declares `schema_version = 1`
//! and may declare a `locale`. Map-like lexicons are tables, set-like ones
//! are arrays of strings:
//!
//! ```toml
//! schema_version = 1
//! locale = "en"
//! timezones = ["gmt", "utc"]
//!
//! [months]
//! january = 1
//!
//! [currency]
//! "$" = ["dollars", "dollar"]
//! ```
//!
//! | lexicon           | shape | key                | value                               |
//! |-------------------|-------|--------------------|-------------------------------------|
//! | `months`          | table | spoken month       | month number 1..=12                 |
//! | `weekdays`        | table | spoken weekday     | written form (`"Monday"`)           |
//! | `currency`        | table | written symbol     | `[plural, singular]` spoken forms   |
//! | `units`           | table | written unit       | `[plural, singular]` spoken forms   |
//! | `time_words`      | table | spoken form        | clock value (`"12:00 pm"`)          |
//! | `meridiem`        | table | spoken form        | written form (`"pm"`)               |
//! | `phone`           | table | digit count        | mask with `X` per digit             |
//! | `abbreviations`   | table | written form       | list of expansions                  |
//! | `percent`         | array | spoken form        |                                     |
//! | `timezones`       | array | spoken zone        |                                     |
//! | `time_triggers`   | array | word before a time |                                     |
//! | `time_connectors` | array | word between times |                                     |
//! | `clock_suffix`    | array | spoken form        |                                     |
//!
//! An abbreviation expansion is either a bare string or
//! `{ text = "doctor", context = "before-proper" }`, where the context is
//! `before-proper` ("Dr. John") or `after-proper` ("Lakeside Dr."). The first
//! listed expansion is the fallback.
//!
//! Several documents may contribute to one lexicon. A key repeated within a
//! lexicon, in the same file or across files, is an error.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("{file}:{line}: {message}")]
    Syntax { file: String, line: usize, message: String },
    #[error("{file}:{line}: duplicate key {key:?} in {lexicon}")]
    DuplicateKey {
        file: String,
        line: usize,
        lexicon: String,
        key: String,
    },
    #[error("cannot read grammar {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One lexicon file: a name used in diagnostics plus its text.
#[derive(Debug, Clone)]
pub struct LexiconDocument {
    pub name: String,
    pub text: String,
}

impl LexiconDocument {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> LexiconDocument {
        LexiconDocument {
            name: name.into(),
            text: text.into(),
        }
    }
}

const BUILTIN_EN: [(&str, &str); 6] = [
    ("en/dates.toml", include_str!("../grammar/en/dates.toml")),
    ("en/time.toml", include_str!("../grammar/en/time.toml")),
    ("en/money.toml", include_str!("../grammar/en/money.toml")),
    ("en/units.toml", include_str!("../grammar/en/units.toml")),
    ("en/phone.toml", include_str!("../grammar/en/phone.toml")),
    ("en/abbreviations.toml", include_str!("../grammar/en/abbreviations.toml")),
];

/// A 12-hour or 24-hour clock reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockTime {
    pub hour: u8,
    pub minute: u8,
    pub meridiem: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbbrevContext {
    BeforeProper,
    AfterProper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbbrevExpansion {
    pub text: String,
    pub context: Option<AbbrevContext>,
}

/// Spoken forms for a written symbol or unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpokenForms {
    pub plural: String,
    pub singular: String,
}

/// Multi-word phrase lookup with longest-match at a token position.
#[derive(Debug, Clone)]
pub struct PhraseMap<V> {
    entries: HashMap<String, V>,
    max_words: usize,
}

impl<V> Default for PhraseMap<V> {
    fn default() -> Self {
        PhraseMap {
            entries: HashMap::new(),
            max_words: 0,
        }
    }
}

impl<V> PhraseMap<V> {
    fn insert(&mut self, phrase: &str, value: V) {
        self.max_words = self.max_words.max(phrase.split_whitespace().count());
        self.entries.insert(phrase.to_string(), value);
    }

    pub fn get(&self, phrase: &str) -> Option<&V> {
        self.entries.get(phrase)
    }

    /// Longest phrase that matches `words[start..]`, with its length in words.
    pub fn longest_at(&self, words: &[&str], start: usize) -> Option<(&V, usize)> {
        let avail = words.len().saturating_sub(start);
        (1..=self.max_words.min(avail)).rev().find_map(|len| {
            let phrase = words[start..start + len].join(" ");
            self.entries.get(&phrase).map(|v| (v, len))
        })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Compiled lexicons. Immutable once built; share it freely across threads.
#[derive(Debug, Clone, Default)]
pub struct Grammar {
    locale: String,
    months: PhraseMap<u8>,
    month_names: BTreeMap<u8, String>,
    weekdays: PhraseMap<String>,
    currency: PhraseMap<String>,
    currency_forms: HashMap<String, SpokenForms>,
    units: PhraseMap<String>,
    unit_forms: HashMap<String, SpokenForms>,
    percent: PhraseMap<()>,
    percent_word: Option<String>,
    time_words: PhraseMap<ClockTime>,
    meridiem: PhraseMap<String>,
    meridiem_spoken: HashMap<String, String>,
    timezones: HashSet<String>,
    time_triggers: HashSet<String>,
    time_connectors: HashSet<String>,
    clock_suffix: PhraseMap<()>,
    clock_suffix_word: Option<String>,
    phone: BTreeMap<usize, String>,
    abbreviations: HashMap<String, Vec<AbbrevExpansion>>,
}

impl Grammar {
    /// The shipped English lexicons.
    pub fn english() -> Grammar {
        let docs: Vec<LexiconDocument> = BUILTIN_EN
            .iter()
            .map(|(name, text)| LexiconDocument::new(*name, *text))
            .collect();
        compile_grammar(&docs).expect("built-in English grammar compiles")
    }

    /// Compiles a single lexicon file, or every `.toml` file in a directory
    /// in file-name order.
    pub fn load(path: &Path) -> Result<Grammar, GrammarError> {
        let io = |source| GrammarError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut files = Vec::new();
        if path.is_dir() {
            for entry in fs::read_dir(path).map_err(io)? {
                let p = entry.map_err(io)?.path();
                if p.extension().is_some_and(|e| e == "toml") {
                    files.push(p);
                }
            }
            files.sort();
        } else {
            files.push(path.to_path_buf());
        }
        let mut docs = Vec::with_capacity(files.len());
        for f in files {
            let text = fs::read_to_string(&f).map_err(|source| GrammarError::Io {
                path: f.display().to_string(),
                source,
            })?;
            docs.push(LexiconDocument::new(f.display().to_string(), text));
        }
        compile_grammar(&docs)
    }

    pub fn locale(&self) -> &str {
        &self.locale
    }

    pub fn months(&self) -> &PhraseMap<u8> {
        &self.months
    }

    /// Canonical written month name, capitalized ("October").
    pub fn month_name(&self, month: u8) -> Option<&str> {
        self.month_names.get(&month).map(String::as_str)
    }

    /// Month number for a written month token, case-insensitive.
    pub fn month_number(&self, word: &str) -> Option<u8> {
        self.months.get(&word.to_lowercase()).copied()
    }

    pub fn weekdays(&self) -> &PhraseMap<String> {
        &self.weekdays
    }

    pub fn currency(&self) -> &PhraseMap<String> {
        &self.currency
    }

    pub fn currency_forms(&self, symbol: &str) -> Option<&SpokenForms> {
        self.currency_forms.get(symbol)
    }

    /// Written currency symbols, longest first so prefix matching is greedy.
    pub fn currency_symbols(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.currency_forms.keys().map(String::as_str).collect();
        v.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        v
    }

    pub fn units(&self) -> &PhraseMap<String> {
        &self.units
    }

    pub fn unit_forms(&self, unit: &str) -> Option<&SpokenForms> {
        self.unit_forms.get(unit)
    }

    pub fn percent(&self) -> &PhraseMap<()> {
        &self.percent
    }

    pub fn percent_word(&self) -> Option<&str> {
        self.percent_word.as_deref()
    }

    pub fn time_words(&self) -> &PhraseMap<ClockTime> {
        &self.time_words
    }

    pub fn meridiem(&self) -> &PhraseMap<String> {
        &self.meridiem
    }

    /// Preferred spoken form of a written meridiem ("pm" -> "p m").
    pub fn meridiem_spoken(&self, written: &str) -> Option<&str> {
        self.meridiem_spoken.get(&written.to_lowercase()).map(String::as_str)
    }

    pub fn is_timezone(&self, word: &str) -> bool {
        self.timezones.contains(word)
    }

    pub fn is_time_trigger(&self, word: &str) -> bool {
        self.time_triggers.contains(word)
    }

    pub fn is_time_connector(&self, word: &str) -> bool {
        self.time_connectors.contains(word)
    }

    pub fn clock_suffix(&self) -> &PhraseMap<()> {
        &self.clock_suffix
    }

    pub fn clock_suffix_word(&self) -> Option<&str> {
        self.clock_suffix_word.as_deref()
    }

    /// Phone masks keyed by digit count. Empty disables phone tagging.
    pub fn phone_patterns(&self) -> &BTreeMap<usize, String> {
        &self.phone
    }

    pub fn abbreviation(&self, written_lower: &str) -> Option<&[AbbrevExpansion]> {
        self.abbreviations.get(written_lower).map(Vec::as_slice)
    }
}

type Table<V> = BTreeMap<Spanned<String>, Spanned<V>>;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawExpansion {
    Plain(String),
    WithContext { text: String, context: AbbrevContext },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    schema_version: Spanned<u32>,
    locale: Option<Spanned<String>>,
    #[serde(default)]
    months: Table<u8>,
    #[serde(default)]
    weekdays: Table<String>,
    #[serde(default)]
    currency: Table<Vec<String>>,
    #[serde(default)]
    units: Table<Vec<String>>,
    #[serde(default)]
    time_words: Table<String>,
    #[serde(default)]
    meridiem: Table<String>,
    #[serde(default)]
    phone: Table<String>,
    #[serde(default)]
    abbreviations: Table<Vec<RawExpansion>>,
    #[serde(default)]
    percent: Vec<Spanned<String>>,
    #[serde(default)]
    timezones: Vec<Spanned<String>>,
    #[serde(default)]
    time_triggers: Vec<Spanned<String>>,
    #[serde(default)]
    time_connectors: Vec<Spanned<String>>,
    #[serde(default)]
    clock_suffix: Vec<Spanned<String>>,
}

struct Compiler<'a> {
    doc: &'a LexiconDocument,
    seen: &'a mut HashSet<(&'static str, String)>,
}

impl Compiler<'_> {
    fn line(&self, offset: usize) -> usize {
        line_of(&self.doc.text, offset)
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> GrammarError {
        GrammarError::Syntax {
            file: self.doc.name.clone(),
            line: self.line(offset),
            message: message.into(),
        }
    }

    /// Normalizes a key and rejects it if the lexicon already has it.
    fn claim(&mut self, lexicon: &'static str, key: &Spanned<String>, fold: bool) -> Result<String, GrammarError> {
        let norm = if fold {
            normalize_key(key.get_ref())
        } else {
            key.get_ref().trim().to_string()
        };
        if norm.is_empty() {
            return Err(self.syntax(key.span().start, format!("empty key in {lexicon}")));
        }
        if !self.seen.insert((lexicon, norm.clone())) {
            return Err(GrammarError::DuplicateKey {
                file: self.doc.name.clone(),
                line: self.line(key.span().start),
                lexicon: lexicon.to_string(),
                key: norm,
            });
        }
        Ok(norm)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    let end = offset.min(text.len());
    text.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Entries in document order.
fn ordered<V>(table: Table<V>) -> Vec<(Spanned<String>, Spanned<V>)> {
    let mut v: Vec<_> = table.into_iter().collect();
    v.sort_by_key(|(k, _)| k.span().start);
    v
}

fn parse_clock(value: &str) -> Option<ClockTime> {
    let mut parts = value.split_whitespace();
    let (h, m) = parts.next()?.split_once(':')?;
    let hour: u8 = h.parse().ok()?;
    let minute: u8 = m.parse().ok()?;
    let meridiem = parts.next().map(str::to_lowercase);
    if parts.next().is_some() || hour > 23 || minute > 59 || m.len() != 2 {
        return None;
    }
    Some(ClockTime { hour, minute, meridiem })
}

fn parse_forms(value: &[String]) -> Option<SpokenForms> {
    let forms: Vec<String> = value.iter().map(|f| normalize_key(f)).collect();
    match forms.as_slice() {
        [p] if !p.is_empty() => Some(SpokenForms {
            plural: p.clone(),
            singular: p.clone(),
        }),
        [p, s] if !p.is_empty() && !s.is_empty() => Some(SpokenForms {
            plural: p.clone(),
            singular: s.clone(),
        }),
        _ => None,
    }
}

fn normalize_key(key: &str) -> String {
    key.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Compiles lexicon documents into a [`Grammar`].
pub fn compile_grammar(docs: &[LexiconDocument]) -> Result<Grammar, GrammarError> {
    let mut g = Grammar::default();
    let mut seen = HashSet::new();
    for doc in docs {
        let raw: RawDocument = toml::from_str(&doc.text).map_err(|e| GrammarError::Syntax {
            file: doc.name.clone(),
            line: e.span().map_or(1, |s| line_of(&doc.text, s.start)),
            message: e.message().to_string(),
        })?;
        compile_document(&mut g, Compiler { doc, seen: &mut seen }, raw)?;
    }
    Ok(g)
}

fn compile_document(g: &mut Grammar, mut c: Compiler<'_>, raw: RawDocument) -> Result<(), GrammarError> {
    if *raw.schema_version.get_ref() != SCHEMA_VERSION {
        return Err(c.syntax(
            raw.schema_version.span().start,
            format!("unsupported schema_version {}", raw.schema_version.get_ref()),
        ));
    }
    if let Some(locale) = raw.locale {
        if !g.locale.is_empty() && &g.locale != locale.get_ref() {
            return Err(c.syntax(
                locale.span().start,
                format!("locale {} conflicts with {}", locale.get_ref(), g.locale),
            ));
        }
        g.locale = locale.into_inner();
    }
    for (k, v) in ordered(raw.months) {
        let key = c.claim("months", &k, true)?;
        let m = *v.get_ref();
        if !(1..=12).contains(&m) {
            return Err(c.syntax(v.span().start, "month must be 1..=12"));
        }
        g.months.insert(&key, m);
        g.month_names.entry(m).or_insert_with(|| capitalize(&key));
    }
    for (k, v) in ordered(raw.weekdays) {
        let key = c.claim("weekdays", &k, true)?;
        g.weekdays.insert(&key, v.into_inner());
    }
    for (lexicon, table) in [("currency", raw.currency), ("units", raw.units)] {
        for (k, v) in ordered(table) {
            let key = c.claim(lexicon, &k, false)?;
            let forms = parse_forms(v.get_ref()).ok_or_else(|| c.syntax(v.span().start, "expected [plural, singular]"))?;
            let (map, spoken) = if lexicon == "currency" {
                (&mut g.currency, &mut g.currency_forms)
            } else {
                (&mut g.units, &mut g.unit_forms)
            };
            map.insert(&forms.plural, key.clone());
            map.insert(&forms.singular, key.clone());
            spoken.insert(key, forms);
        }
    }
    for (k, v) in ordered(raw.time_words) {
        let key = c.claim("time_words", &k, true)?;
        let clock = parse_clock(v.get_ref())
            .ok_or_else(|| c.syntax(v.span().start, "expected a clock value like \"12:00 pm\""))?;
        g.time_words.insert(&key, clock);
    }
    for (k, v) in ordered(raw.meridiem) {
        let key = c.claim("meridiem", &k, true)?;
        let written = v.get_ref().trim().to_lowercase();
        g.meridiem_spoken.entry(written.clone()).or_insert_with(|| key.clone());
        g.meridiem.insert(&key, written);
    }
    for (k, v) in ordered(raw.phone) {
        let key = c.claim("phone", &k, true)?;
        let digits: usize = key
            .parse()
            .map_err(|_| c.syntax(k.span().start, "phone key must be a digit count"))?;
        let mask = v.get_ref();
        if mask.chars().filter(|&ch| ch == 'X').count() != digits {
            return Err(c.syntax(v.span().start, format!("mask {mask:?} does not have {digits} X slots")));
        }
        g.phone.insert(digits, mask.clone());
    }
    for (k, v) in ordered(raw.abbreviations) {
        let key = c.claim("abbreviations", &k, true)?;
        let span = v.span().start;
        let expansions: Vec<AbbrevExpansion> = v
            .into_inner()
            .into_iter()
            .map(|e| match e {
                RawExpansion::Plain(text) => AbbrevExpansion { text, context: None },
                RawExpansion::WithContext { text, context } => AbbrevExpansion {
                    text,
                    context: Some(context),
                },
            })
            .collect();
        if expansions.is_empty() || expansions.iter().any(|e| e.text.trim().is_empty()) {
            return Err(c.syntax(span, "abbreviation needs at least one non-empty expansion"));
        }
        g.abbreviations.insert(key, expansions);
    }
    for (lexicon, words) in [
        ("percent", raw.percent),
        ("timezones", raw.timezones),
        ("time_triggers", raw.time_triggers),
        ("time_connectors", raw.time_connectors),
        ("clock_suffix", raw.clock_suffix),
    ] {
        for w in words {
            let key = c.claim(lexicon, &w, true)?;
            match lexicon {
                "percent" => {
                    g.percent_word.get_or_insert_with(|| key.clone());
                    g.percent.insert(&key, ());
                }
                "clock_suffix" => {
                    g.clock_suffix_word.get_or_insert_with(|| key.clone());
                    g.clock_suffix.insert(&key, ());
                }
                "timezones" => {
                    g.timezones.insert(key);
                }
                "time_triggers" => {
                    g.time_triggers.insert(key);
                }
                _ => {
                    g.time_connectors.insert(key);
                }
            }
        }
    }
    Ok(())
}
