//! Written to spoken normalization, used to manufacture parallel data.
//!
//! Entities are verbalized in one fixed style (compositional cardinals),
//! punctuation is stripped and recorded, and everything else is lowercased.
//! The written shapes recognized here are exactly the shapes the ITN
//! renderer produces, so covered entities survive a TN/ITN round trip:
//!
//! | written                    | spoken                                     |
//! |----------------------------|--------------------------------------------|
//! | `October 20, 2020`         | `october twenty twenty twenty`             |
//! | `november 29 2012`         | `november twenty ninth twenty twelve`      |
//! | `7:30 pm`, `10:00`         | `seven thirty p m`, `ten o'clock`          |
//! | `$3649.84`, `4%`, `5 km`   | `three thousand ... dollars`, ...          |
//! | `1-800-255-7828`           | `one eight zero zero two five five ...`    |
//! | `3/4`, `21st`, `007`       | `three quarters`, `twenty first`, `zero zero seven` |
//!
//! A capitalized month takes a cardinal day and a lowercase month an ordinal
//! day, mirroring the two date renders of the ITN engine.

use std::fmt;

use thiserror::Error;

use crate::decimal::Decimal;
use crate::grammar::{AbbrevContext, Grammar};
use crate::number::{
    verbalize_cardinal, verbalize_digits, verbalize_fraction, verbalize_ordinal, verbalize_year, ordinal_suffix,
    NumberStyle, ZeroWord,
};
use crate::text::{tokenize, SemioticClass, Sentence, Token, TokenKind};

/// Integer parts at or above this bound are read digit by digit.
const COMPOSITIONAL_LIMIT: u128 = 1_000_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TnRule {
    Date,
    Time,
    Currency,
    Percent,
    Measure,
    Phone,
    Fraction,
    Ordinal,
    Decimal,
    Cardinal,
    Abbreviation,
    Fallback,
}

impl TnRule {
    /// The semiotic class the rule verbalizes, if it is an entity rule.
    pub fn class(self) -> Option<SemioticClass> {
        Some(match self {
            TnRule::Date => SemioticClass::Date,
            TnRule::Time => SemioticClass::Time,
            TnRule::Currency => SemioticClass::Currency,
            TnRule::Percent => SemioticClass::Percent,
            TnRule::Measure => SemioticClass::Measure,
            TnRule::Phone => SemioticClass::Phone,
            TnRule::Fraction => SemioticClass::Fraction,
            TnRule::Ordinal => SemioticClass::Ordinal,
            TnRule::Decimal => SemioticClass::Decimal,
            TnRule::Cardinal => SemioticClass::Cardinal,
            TnRule::Abbreviation | TnRule::Fallback => return None,
        })
    }
}

impl fmt::Display for TnRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TnRule::Date => "date",
            TnRule::Time => "time",
            TnRule::Currency => "currency",
            TnRule::Percent => "percent",
            TnRule::Measure => "measure",
            TnRule::Phone => "phone",
            TnRule::Fraction => "fraction",
            TnRule::Ordinal => "ordinal",
            TnRule::Decimal => "decimal",
            TnRule::Cardinal => "cardinal",
            TnRule::Abbreviation => "abbreviation",
            TnRule::Fallback => "fallback",
        };
        f.write_str(name)
    }
}

/// One rewritten written span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    /// Written token range, punctuation inside the entity included.
    pub start: usize,
    pub end: usize,
    pub written: String,
    pub spoken: String,
    /// Range of the verbalization in the spoken sentence.
    pub spoken_start: usize,
    pub spoken_end: usize,
    pub rule: TnRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TnResult {
    pub spoken: Sentence,
    /// Every punctuation token of the written sentence, by written index.
    pub removed_punct: Vec<(usize, String)>,
    pub expansions: Vec<Expansion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0:?} is not in the abbreviation lexicon")]
pub struct NotAnAbbreviation(pub String);

fn is_capitalized_word(t: &Token) -> bool {
    t.kind() == TokenKind::Word && t.surface().chars().next().is_some_and(char::is_uppercase)
}

/// Expands an abbreviation from its neighbours. A capitalized neighbour
/// decides first (right means the abbreviation is a title, left means it
/// follows a name); failing that any word neighbour decides the same way;
/// otherwise the first listed expansion is used.
pub fn expand_abbreviation(
    g: &Grammar,
    token: &Token,
    left: Option<&Token>,
    right: Option<&Token>,
) -> Result<String, NotAnAbbreviation> {
    let key = if token.lower().ends_with('.') {
        token.lower().to_string()
    } else {
        format!("{}.", token.lower())
    };
    let expansions = g
        .abbreviation(&key)
        .ok_or_else(|| NotAnAbbreviation(token.surface().to_string()))?;
    let is_word = |t: Option<&Token>| t.is_some_and(|t| t.kind() == TokenKind::Word);
    let wanted = if right.is_some_and(is_capitalized_word) {
        Some(AbbrevContext::BeforeProper)
    } else if left.is_some_and(is_capitalized_word) {
        Some(AbbrevContext::AfterProper)
    } else if is_word(right) {
        Some(AbbrevContext::BeforeProper)
    } else if is_word(left) {
        Some(AbbrevContext::AfterProper)
    } else {
        None
    };
    let chosen = wanted
        .and_then(|w| expansions.iter().find(|e| e.context == Some(w)))
        .unwrap_or(&expansions[0]);
    Ok(chosen.text.clone())
}

fn words(tokens: Vec<Token>) -> Vec<String> {
    tokens.into_iter().map(|t| t.surface().to_string()).collect()
}

fn split_words(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split_whitespace().map(str::to_string)
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Verbalizes a plain numeric literal: `42`, `-3`, `3649.84`, `007`.
pub fn verbalize_literal(s: &str) -> Option<Vec<String>> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    if !is_digits(int) || frac.is_some_and(|f| !is_digits(f)) {
        return None;
    }
    if int.len() > 1 && int.starts_with('0') {
        if negative || frac.is_some() {
            return None;
        }
        return Some(words(verbalize_digits(int, ZeroWord::Zero)));
    }
    let value: Decimal = body.parse().ok()?;
    if value.integer_part() >= COMPOSITIONAL_LIMIT {
        return (!negative && frac.is_none()).then(|| words(verbalize_digits(int, ZeroWord::Zero)));
    }
    if negative && value.mantissa() == 0 {
        return None;
    }
    let value = if negative { value.negate() } else { value };
    let style = if value.is_integer() {
        NumberStyle::Compositional
    } else {
        NumberStyle::Decimal
    };
    verbalize_cardinal(&value, style).ok().map(words)
}

fn small_int(s: &str, max: u32) -> Option<u32> {
    if !is_digits(s) || s.len() > 4 || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    s.parse().ok().filter(|&v| v <= max)
}

fn compositional(v: u128) -> Vec<String> {
    words(verbalize_cardinal(&Decimal::from_int(v), NumberStyle::Compositional).expect("small integers verbalize"))
}

struct Hit {
    len: usize,
    spoken: Vec<String>,
    rule: TnRule,
}

struct Normalizer<'a> {
    g: &'a Grammar,
    tokens: &'a [Token],
}

impl<'a> Normalizer<'a> {
    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.tokens.get(i)
    }

    fn surface(&self, i: usize) -> Option<&'a str> {
        self.tok(i).map(Token::surface)
    }

    fn skip_comma(&self, i: usize) -> usize {
        if self.surface(i) == Some(",") {
            i + 1
        } else {
            i
        }
    }

    fn date(&self, i: usize) -> Option<Hit> {
        let mut spoken = Vec::new();
        let mut k = i;
        if let Some(t) = self.tok(i) {
            if self.g.weekdays().get(t.lower()).is_some() {
                spoken.push(t.lower().to_string());
                k = self.skip_comma(i + 1);
            }
        }
        let month_tok = self.tok(k)?;
        self.g.month_number(month_tok.surface())?;
        let cardinal_day = is_capitalized_word(month_tok);
        spoken.push(month_tok.lower().to_string());
        k += 1;
        let day = self.surface(k).and_then(|s| small_int(s, 31)).filter(|&d| d >= 1);
        let mut has_day = false;
        if let Some(d) = day {
            has_day = true;
            if cardinal_day {
                spoken.extend(compositional(d as u128));
            } else {
                spoken.extend(words(verbalize_ordinal(d as u128).ok()?));
            }
            k += 1;
        }
        let year_at = if has_day { self.skip_comma(k) } else { k };
        let year = self
            .surface(year_at)
            .filter(|s| s.len() == 4)
            .and_then(|s| small_int(s, 2099))
            .filter(|&y| y >= 1000);
        let mut has_year = false;
        if let Some(y) = year {
            has_year = true;
            spoken.extend(words(verbalize_year(y as u128).ok()?));
            k = year_at + 1;
        }
        if !has_day && !has_year {
            return None;
        }
        Some(Hit {
            len: k - i,
            spoken,
            rule: TnRule::Date,
        })
    }

    fn time(&self, i: usize) -> Option<Hit> {
        let (h, m) = self.surface(i)?.split_once(':')?;
        if m.len() != 2 || h.is_empty() || h.len() > 2 {
            return None;
        }
        let hour = small_int(h, 23).filter(|&v| v >= 1)?;
        let minute: u32 = m.parse().ok().filter(|v| *v <= 59 && is_digits(m))?;
        let meridiem = self
            .tok(i + 1)
            .and_then(|t| self.g.meridiem_spoken(t.lower()).map(|s| (t.lower(), s)))
            .filter(|_| hour <= 12);
        let mut spoken = compositional(hour as u128);
        match minute {
            0 if meridiem.is_none() => spoken.extend(split_words(self.g.clock_suffix_word()?)),
            0 => {}
            1..=9 => {
                spoken.push("oh".into());
                spoken.extend(compositional(minute as u128));
            }
            _ => spoken.extend(compositional(minute as u128)),
        }
        let mut len = 1;
        if let Some((_, words)) = meridiem {
            spoken.extend(split_words(words));
            len += 1;
        }
        Some(Hit {
            len,
            spoken,
            rule: TnRule::Time,
        })
    }

    fn currency(&self, i: usize) -> Option<Hit> {
        let s = self.surface(i)?;
        let symbol = self.g.currency_symbols().into_iter().find(|sym| s.starts_with(sym))?;
        let amount = &s[symbol.len()..];
        let mut spoken = verbalize_literal(amount)?;
        let forms = self.g.currency_forms(symbol)?;
        let form = if amount == "1" { &forms.singular } else { &forms.plural };
        spoken.extend(split_words(form));
        Some(Hit {
            len: 1,
            spoken,
            rule: TnRule::Currency,
        })
    }

    fn percent(&self, i: usize) -> Option<Hit> {
        let amount = self.surface(i)?.strip_suffix('%')?;
        let mut spoken = verbalize_literal(amount)?;
        spoken.extend(split_words(self.g.percent_word()?));
        Some(Hit {
            len: 1,
            spoken,
            rule: TnRule::Percent,
        })
    }

    fn measure(&self, i: usize) -> Option<Hit> {
        let amount = self.surface(i)?;
        let forms = self.g.unit_forms(self.surface(i + 1)?)?;
        let mut spoken = verbalize_literal(amount)?;
        let form = if amount == "1" { &forms.singular } else { &forms.plural };
        spoken.extend(split_words(form));
        Some(Hit {
            len: 2,
            spoken,
            rule: TnRule::Measure,
        })
    }

    fn phone(&self, i: usize) -> Option<Hit> {
        let s = self.surface(i)?;
        if !s.contains('-') {
            return None;
        }
        let digits: String = s.chars().filter(char::is_ascii_digit).collect();
        let mask = self.g.phone_patterns().get(&digits.len())?;
        let mut it = digits.chars();
        let shaped: String = mask
            .chars()
            .map(|c| if c == 'X' { it.next().unwrap_or('X') } else { c })
            .collect();
        (shaped == s).then(|| Hit {
            len: 1,
            spoken: words(verbalize_digits(&digits, ZeroWord::Zero)),
            rule: TnRule::Phone,
        })
    }

    fn fraction(&self, i: usize) -> Option<Hit> {
        let (n, d) = self.surface(i)?.split_once('/')?;
        let n = small_int(n, 9999)?;
        let d = small_int(d, 9999)?;
        Some(Hit {
            len: 1,
            spoken: words(verbalize_fraction(n as u128, d as u128).ok()?),
            rule: TnRule::Fraction,
        })
    }

    fn ordinal(&self, i: usize) -> Option<Hit> {
        let s = self.surface(i)?;
        let digits = s.trim_end_matches(|c: char| c.is_ascii_alphabetic());
        let suffix = &s[digits.len()..];
        if !is_digits(digits) || digits.starts_with('0') || digits.len() > 15 {
            return None;
        }
        let v: u128 = digits.parse().ok()?;
        (suffix == ordinal_suffix(v)).then_some(())?;
        Some(Hit {
            len: 1,
            spoken: words(verbalize_ordinal(v).ok()?),
            rule: TnRule::Ordinal,
        })
    }

    fn number(&self, i: usize) -> Option<Hit> {
        let s = self.surface(i)?;
        let spoken = verbalize_literal(s)?;
        let rule = if s.contains('.') { TnRule::Decimal } else { TnRule::Cardinal };
        Some(Hit { len: 1, spoken, rule })
    }

    fn neighbour(&self, i: usize, step: isize) -> Option<&'a Token> {
        let mut k = i as isize + step;
        while k >= 0 && (k as usize) < self.tokens.len() {
            let t = &self.tokens[k as usize];
            if !t.is_punctuation() {
                return Some(t);
            }
            k += step;
        }
        None
    }

    fn abbreviation(&self, i: usize) -> Option<Hit> {
        let t = self.tok(i)?;
        if t.kind() != TokenKind::Word || self.surface(i + 1) != Some(".") {
            return None;
        }
        let left = i.checked_sub(1).and_then(|_| self.neighbour(i, -1));
        let right = self.neighbour(i + 1, 1);
        let text = expand_abbreviation(self.g, t, left, right).ok()?;
        Some(Hit {
            len: 2,
            spoken: split_words(&text.to_lowercase()).collect(),
            rule: TnRule::Abbreviation,
        })
    }

    /// Digit runs are verbalized, letters lowercased, anything else dropped.
    fn fallback(&self, i: usize) -> Vec<String> {
        let t = &self.tokens[i];
        if t.kind() != TokenKind::Number {
            return vec![t.lower().to_string()];
        }
        let mut out = Vec::new();
        let mut run = String::new();
        let mut kind = None;
        let flush = |run: &mut String, kind: Option<bool>, out: &mut Vec<String>| {
            match kind {
                Some(true) => out.extend(verbalize_literal(run).unwrap_or_default()),
                Some(false) => out.push(run.to_lowercase()),
                None => {}
            }
            run.clear();
        };
        for c in t.surface().chars() {
            let k = if c.is_ascii_digit() {
                Some(true)
            } else if c.is_alphabetic() {
                Some(false)
            } else {
                None
            };
            if k != kind {
                flush(&mut run, kind, &mut out);
                kind = k;
            }
            if k.is_some() {
                run.push(c);
            }
        }
        flush(&mut run, kind, &mut out);
        out
    }
}

/// Written to spoken form.
pub fn tn(g: &Grammar, written: &str) -> TnResult {
    let s = tokenize(written);
    let n = Normalizer { g, tokens: &s.tokens };
    let mut spoken: Vec<String> = Vec::new();
    let mut removed_punct = Vec::new();
    let mut expansions = Vec::new();
    let mut i = 0;
    while i < s.tokens.len() {
        let t = &s.tokens[i];
        if t.is_punctuation() {
            removed_punct.push((i, t.surface().to_string()));
            i += 1;
            continue;
        }
        let hit = [
            Normalizer::date,
            Normalizer::time,
            Normalizer::currency,
            Normalizer::percent,
            Normalizer::measure,
            Normalizer::phone,
            Normalizer::fraction,
            Normalizer::ordinal,
            Normalizer::number,
            Normalizer::abbreviation,
        ]
        .iter()
        .find_map(|f| f(&n, i));
        match hit {
            Some(hit) => {
                let start = spoken.len();
                if hit.rule != TnRule::Abbreviation {
                    for k in i..i + hit.len {
                        if s.tokens[k].is_punctuation() {
                            removed_punct.push((k, s.tokens[k].surface().to_string()));
                        }
                    }
                }
                let written = crate::text::join_surfaces(s.tokens[i..i + hit.len].iter().map(Token::surface));
                spoken.extend(hit.spoken.iter().cloned());
                expansions.push(Expansion {
                    start: i,
                    end: i + hit.len,
                    written,
                    spoken: hit.spoken.join(" "),
                    spoken_start: start,
                    spoken_end: spoken.len(),
                    rule: hit.rule,
                });
                i += hit.len;
            }
            None => {
                let out = n.fallback(i);
                if t.kind() == TokenKind::Number {
                    let start = spoken.len();
                    spoken.extend(out.iter().cloned());
                    expansions.push(Expansion {
                        start: i,
                        end: i + 1,
                        written: t.surface().to_string(),
                        spoken: out.join(" "),
                        spoken_start: start,
                        spoken_end: spoken.len(),
                        rule: TnRule::Fallback,
                    });
                } else {
                    spoken.extend(out);
                }
                i += 1;
            }
        }
    }
    TnResult {
        spoken: Sentence::from_tokens(spoken.into_iter().map(Token::new).collect()),
        removed_punct,
        expansions,
    }
}
