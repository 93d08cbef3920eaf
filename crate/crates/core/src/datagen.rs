//! Parallel corpus manufacturing.
//!
//! Every written line is normalized with [`tn`], punctuation is restored into
//! the spoken side, and the pair is emitted as [`Provenance::TnGenerated`].
//! Lines carrying cardinals are additionally resampled: with probability
//! `synthetic_ratio` each cardinal is re-read in a uniformly chosen spoken
//! style ("twenty one oh five" for 2105) and the result is kept as a
//! [`Provenance::Synthetic`] pair if the rule engine maps it back to the
//! written line.
//!
//! Randomness comes from ChaCha8 seeded with the corpus seed, using the
//! zero-based line index as the stream number. Each line's draws are thus
//! independent of every other line and of processing order.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{restore_punctuation, tag_itn};
use crate::decimal::Decimal;
use crate::grammar::Grammar;
use crate::itn::itn;
use crate::number::{verbalize_cardinal, verbalize_digits, NumberStyle, ZeroWord};
use crate::text::{tokenize, SemioticClass, Sentence, Token};
use crate::tn::{tn, TnResult, TnRule};

/// Largest value (exclusive) accepted by [`gen_cardinal_variants`].
pub const VARIANT_LIMIT: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    TnGenerated,
    Synthetic,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::TnGenerated => "tn_generated",
            Provenance::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub spoken: String,
    pub written: String,
    pub provenance: Provenance,
    #[serde(default)]
    pub classes: Vec<SemioticClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("expected 3 tab-separated fields, found {0}")]
    FieldCount(usize),
    #[error("unknown provenance {0:?}")]
    Provenance(String),
    #[error("malformed record: {0}")]
    Json(String),
}

impl ParallelPair {
    /// `spoken<TAB>written<TAB>provenance`.
    pub fn to_tsv(&self) -> String {
        format!("{}\t{}\t{}", self.spoken, self.written, self.provenance)
    }

    pub fn from_tsv(line: &str) -> Result<ParallelPair, RecordError> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [spoken, written, provenance] = fields[..] else {
            return Err(RecordError::FieldCount(fields.len()));
        };
        let provenance = match provenance.trim() {
            "tn_generated" => Provenance::TnGenerated,
            "synthetic" => Provenance::Synthetic,
            other => return Err(RecordError::Provenance(other.to_string())),
        };
        Ok(ParallelPair {
            spoken: spoken.to_string(),
            written: written.to_string(),
            provenance,
            classes: Vec::new(),
        })
    }

    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("pairs always serialize")
    }

    pub fn from_jsonl(line: &str) -> Result<ParallelPair, RecordError> {
        serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))
    }
}

fn join(tokens: Vec<Token>) -> String {
    tokens.iter().map(Token::surface).collect::<Vec<_>>().join(" ")
}

/// One spoken reading of `value` per applicable style, both "zero" and "oh"
/// digit readings included, without duplicates.
///
/// Panics if `value >= 10^12`.
pub fn gen_cardinal_variants(value: u64) -> Vec<String> {
    assert!(value < VARIANT_LIMIT, "{value} is out of range for cardinal variants");
    let d = Decimal::from_int(value as u128);
    let mut out: Vec<String> = Vec::new();
    let mut push = |s: String| {
        if !out.contains(&s) {
            out.push(s);
        }
    };
    for style in [NumberStyle::Compositional, NumberStyle::CompositionalAnd, NumberStyle::PairRead] {
        if let Ok(tokens) = verbalize_cardinal(&d, style) {
            push(join(tokens));
        }
    }
    let digits = value.to_string();
    push(join(verbalize_digits(&digits, ZeroWord::Zero)));
    push(join(verbalize_digits(&digits, ZeroWord::Oh)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("line {0} is empty")]
    Empty(usize),
    #[error("line {0} normalizes to nothing")]
    NothingSpoken(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("synthetic ratio {0} is outside [0, 1]")]
pub struct RatioError(pub f64);

/// Turns written lines into parallel pairs. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct CorpusBuilder<'g> {
    g: &'g Grammar,
    seed: u64,
    synthetic_ratio: f64,
}

impl<'g> CorpusBuilder<'g> {
    pub fn new(g: &'g Grammar, seed: u64, synthetic_ratio: f64) -> Result<CorpusBuilder<'g>, RatioError> {
        if !(0.0..=1.0).contains(&synthetic_ratio) {
            return Err(RatioError(synthetic_ratio));
        }
        Ok(CorpusBuilder {
            g,
            seed,
            synthetic_ratio,
        })
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Pairs for the line at zero-based `index`: the TN pair, then possibly
    /// one synthetic pair.
    pub fn process_line(&self, index: usize, line: &str) -> Result<Vec<ParallelPair>, LineError> {
        let written = line.split_whitespace().collect::<Vec<_>>().join(" ");
        if written.is_empty() {
            return Err(LineError::Empty(index));
        }
        let result = tn(self.g, &written);
        if result.spoken.is_empty() {
            return Err(LineError::NothingSpoken(index));
        }
        let external = external_punctuation(&written, &result);
        let classes: Vec<SemioticClass> = result.expansions.iter().filter_map(|e| e.rule.class()).collect();
        let mut out = vec![ParallelPair {
            spoken: restore_punctuation(&external, &result.spoken).raw,
            written: written.clone(),
            provenance: Provenance::TnGenerated,
            classes: classes.clone(),
        }];
        let mut rng = self.rng(index);
        if let Some(spoken) = self.synthetic(&result, &external, &written, &mut rng) {
            out.push(ParallelPair {
                spoken,
                written,
                provenance: Provenance::Synthetic,
                classes,
            });
        }
        Ok(out)
    }

    fn synthetic(&self, result: &TnResult, external: &Sentence, written: &str, rng: &mut ChaCha8Rng) -> Option<String> {
        let cardinals: Vec<_> = result
            .expansions
            .iter()
            .filter(|e| e.rule == TnRule::Cardinal)
            .filter_map(|e| {
                let v: u64 = e.written.parse().ok().filter(|&v| v < VARIANT_LIMIT)?;
                (!e.written.starts_with('0') || e.written == "0").then_some((e, v))
            })
            .collect();
        if cardinals.is_empty() || !rng.gen_bool(self.synthetic_ratio) {
            return None;
        }
        let mut tokens: Vec<String> = Vec::new();
        let mut cursor = 0;
        for (e, v) in cardinals {
            tokens.extend(result.spoken.tokens[cursor..e.spoken_start].iter().map(|t| t.surface().to_string()));
            let variants = gen_cardinal_variants(v);
            let pick = variants.choose(rng).expect("at least one variant");
            tokens.extend(pick.split_whitespace().map(str::to_string));
            cursor = e.spoken_end;
        }
        tokens.extend(result.spoken.tokens[cursor..].iter().map(|t| t.surface().to_string()));
        let spoken = Sentence::from_tokens(tokens.into_iter().map(Token::new).collect());
        let restored = restore_punctuation(external, &spoken).raw;
        if itn(self.g, &restored) == written {
            Some(restored)
        } else {
            log::debug!("synthetic variant {restored:?} does not map back to {written:?}");
            None
        }
    }
}

/// The written sentence without punctuation that TN folded into an entity
/// (the comma in "October 20, 2020").
fn external_punctuation(written: &str, result: &TnResult) -> Sentence {
    let s = tokenize(written);
    let internal = |k: usize| result.expansions.iter().any(|e| (e.start..e.end).contains(&k));
    let tokens = s
        .tokens
        .into_iter()
        .enumerate()
        .filter(|(k, t)| !(t.is_punctuation() && internal(*k)))
        .map(|(_, t)| t)
        .collect();
    Sentence::from_tokens(tokens)
}

/// Streams pairs for `lines`. Lines that fail are logged and skipped.
pub fn build_corpus<'a, I>(
    lines: I,
    g: &'a Grammar,
    seed: u64,
    synthetic_ratio: f64,
) -> Result<impl Iterator<Item = ParallelPair> + 'a, RatioError>
where
    I: IntoIterator<Item = String>,
    I::IntoIter: 'a,
{
    let builder = CorpusBuilder::new(g, seed, synthetic_ratio)?;
    Ok(lines
        .into_iter()
        .enumerate()
        .flat_map(move |(i, line)| match builder.process_line(i, &line) {
            Ok(pairs) => pairs,
            Err(e) => {
                log::warn!("skipping: {e}");
                Vec::new()
            }
        }))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorpusStats {
    pub pairs: usize,
    pub by_provenance: BTreeMap<Provenance, usize>,
    pub written_words: usize,
    pub itn_words: usize,
    /// ITN-tagged written words over all written words.
    pub density: Option<f64>,
    pub class_counts: BTreeMap<SemioticClass, usize>,
}

pub fn corpus_stats<'a>(pairs: impl IntoIterator<Item = &'a ParallelPair>) -> CorpusStats {
    let mut st = CorpusStats::default();
    for p in pairs {
        st.pairs += 1;
        *st.by_provenance.entry(p.provenance).or_default() += 1;
        let tagged = tag_itn(&Sentence::words(&p.spoken), &Sentence::words(&p.written));
        st.written_words += tagged.len();
        st.itn_words += tagged.itn_count();
        for &c in &p.classes {
            *st.class_counts.entry(c).or_default() += 1;
        }
    }
    st.density = (st.written_words > 0).then(|| st.itn_words as f64 / st.written_words as f64);
    st
}

/// Shape of generated template sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemplateConfig {
    pub min_entities: usize,
    pub max_entities: usize,
    /// Filler words between, before and after entities.
    pub min_gap: usize,
    pub max_gap: usize,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        TemplateConfig {
            min_entities: 1,
            max_entities: 2,
            min_gap: 1,
            max_gap: 6,
        }
    }
}

/// Filler vocabulary. None of these words take part in any entity pattern.
const FILLER: &[&str] = &[
    "the", "report", "says", "we", "saw", "about", "people", "in", "city", "with", "new", "data", "from", "last",
    "on", "this", "that", "for", "of", "is", "was", "it", "they", "when", "team", "shipped", "there", "were",
    "around", "nearly", "by", "he", "she", "said", "then", "our", "total", "came", "over", "under", "near",
    "result", "score", "value", "counted", "reached", "figure", "station", "river", "market", "price", "museum",
    "visitors", "just", "only", "roughly", "still", "again", "later", "today", "its", "their", "every",
];

const WEEKDAYS: [&str; 7] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];

/// Written sentences built only from constructs the grammar covers, so
/// `itn(tn(w))` reproduces them once punctuation is restored.
#[derive(Debug, Clone)]
pub struct TemplateGenerator<'g> {
    g: &'g Grammar,
    seed: u64,
    config: TemplateConfig,
}

impl<'g> TemplateGenerator<'g> {
    pub fn new(g: &'g Grammar, seed: u64, config: TemplateConfig) -> TemplateGenerator<'g> {
        TemplateGenerator { g, seed, config }
    }

    /// The `index`-th sentence; independent of every other index.
    pub fn sentence(&self, index: usize) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let c = self.config;
        let entities = rng.gen_range(c.min_entities..=c.max_entities);
        let mut pieces: Vec<String> = Vec::new();
        for k in 0..=entities {
            let min = if k == 0 || k == entities { 0 } else { c.min_gap.max(1) };
            let gap = rng.gen_range(min..=c.max_gap.max(min));
            for _ in 0..gap {
                let mut w = FILLER.choose(&mut rng).expect("non-empty").to_string();
                match rng.gen_range(0..20) {
                    0 => w = format!("\"{w}\""),
                    1 => w = format!("({w})"),
                    2 | 3 => w.push(','),
                    _ => {}
                }
                pieces.push(w);
            }
            if k < entities {
                let mut e = self.entity(&mut rng);
                if rng.gen_range(0..8) == 0 {
                    e.push(',');
                }
                pieces.push(e);
            }
        }
        if pieces.is_empty() {
            pieces.push(self.entity(&mut rng));
        }
        let mut s = pieces.join(" ");
        s = s.trim_end_matches(',').to_string();
        s.push_str([".", ".", ".", "!", "?", ""][rng.gen_range(0..6)]);
        s
    }

    fn month(&self, rng: &mut ChaCha8Rng) -> &'g str {
        let m = rng.gen_range(1..=12u8);
        self.g.month_name(m).unwrap_or("January")
    }

    fn decimal(rng: &mut ChaCha8Rng) -> String {
        let places = rng.gen_range(1..=2);
        let int = rng.gen_range(0..1000);
        let frac = rng.gen_range(0..10u32.pow(places));
        format!("{int}.{frac:0width$}", width = places as usize)
    }

    fn entity(&self, rng: &mut ChaCha8Rng) -> String {
        let kinds = 13;
        match rng.gen_range(0..kinds) {
            0 => {
                let digits = rng.gen_range(1..=7);
                rng.gen_range(0..10u64.pow(digits)).to_string()
            }
            1 => Self::decimal(rng),
            2 => {
                let v: u128 = match rng.gen_range(0..3) {
                    0 => rng.gen_range(10..100),
                    1 => rng.gen_range(100..1000),
                    _ => rng.gen_range(1..=20) * 100,
                };
                format!("{v}{}", crate::number::ordinal_suffix(v))
            }
            3 => {
                let d = *[2u32, 3, 4, 5, 8, 10].choose(rng).expect("non-empty");
                format!("{}/{d}", rng.gen_range(1..d))
            }
            4 => {
                let symbols = self.g.currency_symbols();
                let sym = symbols.choose(rng).copied().unwrap_or("$");
                let amount = if rng.gen_bool(0.5) {
                    rng.gen_range(1..10_000).to_string()
                } else {
                    Self::decimal(rng)
                };
                format!("{sym}{amount}")
            }
            5 => {
                let amount = if rng.gen_bool(0.7) {
                    rng.gen_range(0..=100).to_string()
                } else {
                    Self::decimal(rng)
                };
                format!("{amount}%")
            }
            6 => {
                let units = ["km", "m", "cm", "kg", "g", "mi", "ft", "mph", "GB"];
                let unit = units.choose(rng).expect("non-empty");
                format!("{} {unit}", rng.gen_range(1..500))
            }
            7 => {
                let mut digits: String = (0..10).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect();
                if rng.gen_bool(0.5) {
                    digits.insert(0, '1');
                }
                let mask = self.g.phone_patterns().get(&digits.len()).cloned().unwrap_or_default();
                let mut it = digits.chars();
                mask.chars().map(|c| if c == 'X' { it.next().unwrap_or('0') } else { c }).collect()
            }
            8 => {
                let month = self.month(rng);
                let day = rng.gen_range(1..=28);
                let year = rng.gen_range(1100..=2099);
                let weekday = WEEKDAYS.choose(rng).expect("non-empty");
                match rng.gen_range(0..4) {
                    0 => format!("{month} {day}, {year}"),
                    1 => format!("{weekday}, {month} {day}, {year}"),
                    2 => format!("{month} {day}"),
                    _ => format!("{month} {year}"),
                }
            }
            9 => {
                let month = self.month(rng).to_lowercase();
                let day = rng.gen_range(1..=28);
                if rng.gen_bool(0.5) {
                    format!("{month} {day} {}", rng.gen_range(1100..=2099))
                } else {
                    format!("{month} {day}")
                }
            }
            10 => {
                let hour = rng.gen_range(1..=12);
                let minute = *[0u32, 5, 15, 30, 45, rng.gen_range(1..60)].choose(rng).expect("non-empty");
                let meridiem = if rng.gen_bool(0.5) { "am" } else { "pm" };
                format!("{hour}:{minute:02} {meridiem}")
            }
            11 => {
                let hour = rng.gen_range(1..=23);
                let minute = rng.gen_range(0..60);
                let zone = ["gmt", "utc", "est", "pst"].choose(rng).expect("non-empty");
                format!("{hour}:{minute:02} {zone}")
            }
            _ => {
                let hour = rng.gen_range(1..=12);
                if rng.gen_bool(0.5) {
                    format!("at {hour}:{:02}", rng.gen_range(10..60))
                } else {
                    format!("{hour}:00")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::parse_number;
    use proptest::prelude::*;

    fn g() -> Grammar {
        Grammar::english()
    }

    fn parse_all(s: &str) -> Option<u128> {
        let toks: Vec<Token> = s.split_whitespace().map(Token::new).collect();
        let n = parse_number(&toks, 0)?;
        (n.consumed == toks.len()).then(|| n.value.as_u128()).flatten()
    }

    #[test]
    fn variants_of_2105() {
        let v = gen_cardinal_variants(2105);
        for want in [
            "two thousand one hundred five",
            "two thousand one hundred and five",
            "twenty one oh five",
            "two one zero five",
            "two one oh five",
        ] {
            assert!(v.iter().any(|x| x == want), "{want} missing from {v:?}");
        }
        assert_eq!(gen_cardinal_variants(0), ["zero"]);
        assert!(gen_cardinal_variants(1984).iter().any(|x| x == "nineteen eighty four"));
    }

    #[test]
    fn date_line_pair() {
        let g = g();
        let pairs: Vec<_> = build_corpus(vec!["October 20, 2020".to_string()], &g, 1, 0.0).unwrap().collect();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].spoken, "october twenty twenty twenty");
        assert_eq!(pairs[0].written, "October 20, 2020");
        assert_eq!(pairs[0].provenance, Provenance::TnGenerated);
        assert_eq!(pairs[0].classes, [SemioticClass::Date]);
    }

    #[test]
    fn ratio_zero_is_tn_only() {
        let g = g();
        let lines = (0..50).map(|i| format!("we saw {i} people."));
        assert!(build_corpus(lines, &g, 3, 0.0).unwrap().all(|p| p.provenance == Provenance::TnGenerated));
        assert!(build_corpus(Vec::<String>::new(), &g, 3, 1.5).is_err());
    }

    #[test]
    fn synthetic_subset_is_reproducible() {
        let g = g();
        let lines: Vec<String> = (0..1000).map(|i| format!("the team counted {} visitors", i * 7 + 100)).collect();
        let run = || build_corpus(lines.clone(), &g, 11, 0.5).unwrap().collect::<Vec<_>>();
        let a = run();
        assert_eq!(a, run());
        let synthetic = a.iter().filter(|p| p.provenance == Provenance::Synthetic).count();
        assert!((350..650).contains(&synthetic), "{synthetic}");
        for p in a.iter().filter(|p| p.provenance == Provenance::Synthetic) {
            assert_eq!(itn(&g, &p.spoken), p.written);
        }
    }

    #[test]
    fn failing_lines_are_skipped() {
        let g = g();
        let lines = vec!["ok 5".to_string(), "   ".to_string(), ",,,".to_string(), "fine".to_string()];
        let pairs: Vec<_> = build_corpus(lines, &g, 0, 0.0).unwrap().collect();
        assert_eq!(pairs.len(), 2);
    }

    #[test]
    fn record_formats_round_trip() {
        let p = ParallelPair {
            spoken: "four percent".into(),
            written: "4%".into(),
            provenance: Provenance::Synthetic,
            classes: vec![SemioticClass::Percent],
        };
        assert_eq!(p.to_tsv(), "four percent\t4%\tsynthetic");
        let back = ParallelPair::from_tsv(&p.to_tsv()).unwrap();
        assert_eq!((back.spoken.as_str(), back.provenance), ("four percent", Provenance::Synthetic));
        assert_eq!(ParallelPair::from_jsonl(&p.to_jsonl()).unwrap(), p);
        assert!(ParallelPair::from_tsv("a\tb").is_err());
        assert!(ParallelPair::from_tsv("a\tb\tc").is_err());
    }

    #[test]
    fn stats_density() {
        let plain = ParallelPair {
            spoken: "hello there".into(),
            written: "hello there".into(),
            provenance: Provenance::TnGenerated,
            classes: vec![],
        };
        assert_eq!(corpus_stats([&plain]).density, Some(0.0));
        let date = ParallelPair {
            spoken: "october twenty twenty twenty".into(),
            written: "October 20, 2020".into(),
            provenance: Provenance::TnGenerated,
            classes: vec![SemioticClass::Date],
        };
        let st = corpus_stats([&date, &plain]);
        assert_eq!((st.itn_words, st.written_words), (2, 5));
        assert_eq!(st.class_counts.get(&SemioticClass::Date), Some(&1));
        assert_eq!(st.by_provenance.get(&Provenance::TnGenerated), Some(&2));
    }

    #[test]
    fn template_corpus_density_band() {
        let g = g();
        let gen = TemplateGenerator::new(&g, 5, TemplateConfig::default());
        let lines: Vec<String> = (0..1000).map(|i| gen.sentence(i)).collect();
        let pairs: Vec<_> = build_corpus(lines.clone(), &g, 5, 0.0).unwrap().collect();
        let st = corpus_stats(&pairs);
        // Direct count: words of the written side that never appear in the
        // spoken side are exactly the entity words.
        let mut itn_words = 0;
        let mut total = 0;
        for p in &pairs {
            let tagged = tag_itn(&Sentence::words(&p.spoken), &Sentence::words(&p.written));
            total += tagged.len();
            itn_words += tagged.itn_count();
        }
        assert_eq!((st.itn_words, st.written_words), (itn_words, total));
        let d = st.density.unwrap();
        assert!((0.1..0.6).contains(&d), "{d}");
    }

    proptest! {
        #[test]
        fn every_variant_parses_back(v in 0u64..VARIANT_LIMIT) {
            for s in gen_cardinal_variants(v) {
                prop_assert_eq!(parse_all(&s), Some(v as u128), "{}", s);
            }
        }
    }
}
