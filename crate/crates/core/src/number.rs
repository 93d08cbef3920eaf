//! English number words in both directions.
//!
//! Parsing is greedy longest-match over several spoken styles; ties go to
//! the style listed first in [`NumberStyle::PRIORITY`]. Values are exact
//! [`Decimal`]s, so `three thousand six four nine point eight four` renders
//! as `3649.84` without touching binary floating point.

use std::fmt;

use thiserror::Error;

use crate::decimal::Decimal;
use crate::text::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumberStyle {
    /// "two thousand one hundred five"
    Compositional,
    /// "two thousand one hundred and five"
    CompositionalAnd,
    /// "twenty one oh five"
    PairRead,
    /// "two one zero five", "two one oh five"
    DigitRead,
    /// "... point eight four"
    Decimal,
    Ordinal,
    Fraction,
}

impl NumberStyle {
    /// Tie-break order for equal-length matches in [`parse_number`].
    pub const PRIORITY: [NumberStyle; 5] = [
        NumberStyle::Decimal,
        NumberStyle::Compositional,
        NumberStyle::CompositionalAnd,
        NumberStyle::PairRead,
        NumberStyle::DigitRead,
    ];

    fn rank(self) -> usize {
        NumberStyle::PRIORITY
            .iter()
            .position(|&s| s == self)
            .unwrap_or(NumberStyle::PRIORITY.len())
    }
}

impl fmt::Display for NumberStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NumberStyle::Compositional => "compositional",
            NumberStyle::CompositionalAnd => "compositional_and",
            NumberStyle::PairRead => "pair_read",
            NumberStyle::DigitRead => "digit_read",
            NumberStyle::Decimal => "decimal",
            NumberStyle::Ordinal => "ordinal",
            NumberStyle::Fraction => "fraction",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedNumber {
    pub value: Decimal,
    pub style: NumberStyle,
    /// Number of source tokens covered, always at least one.
    pub consumed: usize,
    /// Zeros spoken before the first significant digit ("oh seven" style
    /// digit strings); rendered back in front of the integer part.
    pub leading_zeros: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParsedFraction {
    pub numerator: u128,
    pub denominator: u128,
    pub consumed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("style {style} cannot express {value}")]
    StyleInapplicable { value: String, style: NumberStyle },
}

fn inapplicable(value: impl fmt::Display, style: NumberStyle) -> NumberError {
    NumberError::StyleInapplicable {
        value: value.to_string(),
        style,
    }
}

/// Which word reads the digit 0 in digit-by-digit readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroWord {
    Zero,
    Oh,
}

const UNITS: [&str; 10] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
];
const TEENS: [&str; 10] = [
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 8] = [
    "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];
/// Magnitude words above "hundred", largest last.
const MAGNITUDES: [(&str, u32); 4] = [
    ("thousand", 3),
    ("million", 6),
    ("billion", 9),
    ("trillion", 12),
];
/// Integer parts at or above this bound have no compositional reading.
const COMPOSITIONAL_LIMIT: u128 = 1_000_000_000_000_000;
const MAX_DIGITS: usize = 38;

/// Ordinal word and the cardinal word it is built on.
const ORDINALS: [(&str, &str); 32] = [
    ("first", "one"),
    ("second", "two"),
    ("third", "three"),
    ("fourth", "four"),
    ("fifth", "five"),
    ("sixth", "six"),
    ("seventh", "seven"),
    ("eighth", "eight"),
    ("ninth", "nine"),
    ("tenth", "ten"),
    ("eleventh", "eleven"),
    ("twelfth", "twelve"),
    ("thirteenth", "thirteen"),
    ("fourteenth", "fourteen"),
    ("fifteenth", "fifteen"),
    ("sixteenth", "sixteen"),
    ("seventeenth", "seventeen"),
    ("eighteenth", "eighteen"),
    ("nineteenth", "nineteen"),
    ("twentieth", "twenty"),
    ("thirtieth", "thirty"),
    ("fortieth", "forty"),
    ("fiftieth", "fifty"),
    ("sixtieth", "sixty"),
    ("seventieth", "seventy"),
    ("eightieth", "eighty"),
    ("ninetieth", "ninety"),
    ("hundredth", "hundred"),
    ("thousandth", "thousand"),
    ("millionth", "million"),
    ("billionth", "billion"),
    ("trillionth", "trillion"),
];

pub(crate) fn unit_value(w: &str) -> Option<u128> {
    UNITS.iter().position(|&u| u == w).map(|v| v as u128)
}

fn nonzero_unit(w: &str) -> Option<u128> {
    unit_value(w).filter(|&v| v > 0)
}

fn teen_value(w: &str) -> Option<u128> {
    TEENS.iter().position(|&u| u == w).map(|v| v as u128 + 10)
}

fn tens_value(w: &str) -> Option<u128> {
    TENS.iter().position(|&u| u == w).map(|v| (v as u128 + 2) * 10)
}

fn magnitude_exp(w: &str) -> Option<u32> {
    MAGNITUDES.iter().find(|(m, _)| *m == w).map(|&(_, e)| e)
}

/// A single spoken digit. "oh" is accepted only when `allow_oh`.
pub(crate) fn digit_value(w: &str, allow_oh: bool) -> Option<u128> {
    if allow_oh && w == "oh" {
        Some(0)
    } else {
        unit_value(w)
    }
}

pub(crate) fn is_number_word(w: &str) -> bool {
    unit_value(w).is_some()
        || teen_value(w).is_some()
        || tens_value(w).is_some()
        || magnitude_exp(w).is_some()
        || matches!(w, "hundred" | "oh" | "point")
}

fn ordinal_base(w: &str) -> Option<&'static str> {
    ORDINALS.iter().find(|(o, _)| *o == w).map(|&(_, c)| c)
}

fn word_at<'a>(words: &[&'a str], i: usize) -> Option<&'a str> {
    words.get(i).copied()
}

/// Every reading of 1..=99 starting at `i`, longest first.
pub(crate) fn sub100_options(words: &[&str], i: usize) -> Vec<(u128, usize)> {
    let Some(w) = word_at(words, i) else {
        return Vec::new();
    };
    if let Some(t) = tens_value(w) {
        let mut out = Vec::with_capacity(2);
        if let Some(u) = word_at(words, i + 1).and_then(nonzero_unit) {
            out.push((t + u, 2));
        }
        out.push((t, 1));
        out
    } else if let Some(v) = teen_value(w).or_else(|| nonzero_unit(w)) {
        vec![(v, 1)]
    } else {
        Vec::new()
    }
}

fn sub100(words: &[&str], i: usize) -> Option<(u128, usize)> {
    sub100_options(words, i).into_iter().next()
}

/// 1..=999 with an optional "and" after "hundred".
fn sub1000(words: &[&str], i: usize) -> Option<(u128, usize, bool)> {
    if let (Some(h), Some("hundred")) = (word_at(words, i).and_then(nonzero_unit), word_at(words, i + 1)) {
        let base = h * 100;
        if word_at(words, i + 2) == Some("and") {
            if let Some((r, len)) = sub100(words, i + 3) {
                return Some((base + r, 3 + len, true));
            }
        }
        return Some(match sub100(words, i + 2) {
            Some((r, len)) => (base + r, 2 + len, false),
            None => (base, 2, false),
        });
    }
    sub100(words, i).map(|(v, len)| (v, len, false))
}

#[derive(Debug, Clone, Copy)]
struct Compositional {
    value: u128,
    len: usize,
    used_and: bool,
    /// State right after the last magnitude word: (value, len, exponent).
    last_magnitude: Option<(u128, usize, u32)>,
}

fn compositional(words: &[&str], start: usize) -> Option<Compositional> {
    if word_at(words, start) == Some("zero") {
        return Some(Compositional {
            value: 0,
            len: 1,
            used_and: false,
            last_magnitude: None,
        });
    }
    let mut total = 0u128;
    let mut pos = start;
    let mut last_exp = u32::MAX;
    let mut used_and = false;
    let mut last_magnitude = None;
    while let Some((chunk, len, and)) = sub1000(words, pos) {
        used_and |= and;
        let after = pos + len;
        match word_at(words, after).and_then(magnitude_exp) {
            Some(exp) if exp < last_exp => {
                total += chunk * 10u128.pow(exp);
                last_exp = exp;
                pos = after + 1;
                last_magnitude = Some((total, pos - start, exp));
            }
            _ => {
                total += chunk;
                pos = after;
                break;
            }
        }
    }
    (pos > start).then_some(Compositional {
        value: total,
        len: pos - start,
        used_and,
        last_magnitude,
    })
}

/// A compositional head ending in a magnitude, followed by exactly as many
/// spoken digits as the magnitude has zeros: "three thousand six four nine".
fn compositional_with_digit_tail(words: &[&str], start: usize) -> Option<Compositional> {
    let full = compositional(words, start)?;
    let (head, head_len, exp) = full.last_magnitude?;
    let exp = exp as usize;
    let tail_start = start + head_len;
    let mut tail = 0u128;
    for k in 0..exp {
        tail = tail * 10 + digit_value(word_at(words, tail_start + k)?, true)?;
    }
    Some(Compositional {
        value: head + tail,
        len: head_len + exp,
        used_and: full.used_and,
        last_magnitude: None,
    })
}

fn two_digit_options(words: &[&str], i: usize) -> Vec<(u128, usize)> {
    sub100_options(words, i).into_iter().filter(|&(v, _)| v >= 10).collect()
}

fn pair_read(words: &[&str], start: usize) -> Option<(u128, usize)> {
    let mut firsts = two_digit_options(words, start);
    if let Some(u) = word_at(words, start).and_then(nonzero_unit) {
        firsts.push((u, 1));
    }
    let mut best: Option<(u128, usize)> = None;
    for (high, high_len) in firsts {
        let i = start + high_len;
        let mut lows = Vec::new();
        match word_at(words, i) {
            Some("hundred") => lows.push((0, 1)),
            Some("oh" | "zero") => {
                if let Some(u) = word_at(words, i + 1).and_then(nonzero_unit) {
                    lows.push((u, 2));
                }
            }
            _ => lows.extend(two_digit_options(words, i)),
        }
        for (low, low_len) in lows {
            let cand = (high * 100 + low, high_len + low_len);
            if best.is_none_or(|b| cand.1 > b.1) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Digit-by-digit reading of two or more digits. "oh" may not lead.
fn digit_read(words: &[&str], start: usize) -> Option<(String, usize)> {
    digit_value(word_at(words, start)?, false)?;
    let mut digits = String::new();
    let mut i = start;
    while digits.len() < MAX_DIGITS {
        match word_at(words, i).and_then(|w| digit_value(w, true)) {
            Some(d) => digits.push(char::from(b'0' + d as u8)),
            None => break,
        }
        i += 1;
    }
    (digits.len() >= 2).then(|| (digits, i - start))
}

fn integer_candidates(words: &[&str], start: usize) -> Vec<ParsedNumber> {
    let mut out = Vec::new();
    let int = |v: u128, style, consumed, leading_zeros| ParsedNumber {
        value: Decimal::from_int(v),
        style,
        consumed,
        leading_zeros,
    };
    for comp in [compositional(words, start), compositional_with_digit_tail(words, start)]
        .into_iter()
        .flatten()
    {
        let style = if comp.used_and {
            NumberStyle::CompositionalAnd
        } else {
            NumberStyle::Compositional
        };
        out.push(int(comp.value, style, comp.len, 0));
    }
    if let Some((v, len)) = pair_read(words, start) {
        out.push(int(v, NumberStyle::PairRead, len, 0));
    }
    if let Some((digits, len)) = digit_read(words, start) {
        let significant = digits.trim_start_matches('0');
        let leading = digits.len() - significant.len().max(1);
        let v = significant.parse().unwrap_or(0);
        out.push(int(v, NumberStyle::DigitRead, len, leading));
    }
    out
}

fn better(cand: &ParsedNumber, best: &ParsedNumber) -> bool {
    cand.consumed > best.consumed || (cand.consumed == best.consumed && cand.style.rank() < best.style.rank())
}

/// Word-level core of [`parse_number`]; `words` are case-folded surfaces.
pub(crate) fn parse_number_words(words: &[&str], start: usize) -> Option<ParsedNumber> {
    if word_at(words, start) == Some("minus") {
        let after_number = start > 0 && is_number_word(words[start - 1]);
        if after_number {
            return None;
        }
        let mut n = parse_unsigned(words, start + 1)?;
        n.value = n.value.negate();
        n.consumed += 1;
        return Some(n);
    }
    parse_unsigned(words, start)
}

fn parse_unsigned(words: &[&str], start: usize) -> Option<ParsedNumber> {
    let ints = integer_candidates(words, start);
    let mut best: Option<ParsedNumber> = None;
    let mut consider = |cand: ParsedNumber| {
        if best.as_ref().is_none_or(|b| better(&cand, b)) {
            best = Some(cand);
        }
    };
    for n in ints {
        let point = start + n.consumed;
        if word_at(words, point) == Some("point") {
            let mut frac = String::new();
            while let Some(d) = word_at(words, point + 1 + frac.len()).and_then(|w| digit_value(w, true)) {
                frac.push(char::from(b'0' + d as u8));
                if frac.len() >= MAX_DIGITS {
                    break;
                }
            }
            if !frac.is_empty() {
                if let Some(value) = n.value.as_u128().and_then(|i| Decimal::from_parts(i, &frac)) {
                    consider(ParsedNumber {
                        value,
                        style: NumberStyle::Decimal,
                        consumed: n.consumed + 1 + frac.len(),
                        leading_zeros: n.leading_zeros,
                    });
                }
            }
        }
        consider(n);
    }
    best
}

fn lower_words(tokens: &[Token]) -> Vec<&str> {
    tokens.iter().map(Token::lower).collect()
}

/// Longest number phrase starting at `start`, or `None` when the token there
/// begins no number phrase.
pub fn parse_number(tokens: &[Token], start: usize) -> Option<ParsedNumber> {
    parse_number_words(&lower_words(tokens), start)
}

pub(crate) fn parse_ordinal_words(words: &[&str], start: usize) -> Option<ParsedNumber> {
    let mut k = start;
    let base = loop {
        let w = word_at(words, k)?;
        if let Some(base) = ordinal_base(w) {
            break base;
        }
        let cardinal = unit_value(w).is_some()
            || teen_value(w).is_some()
            || tens_value(w).is_some()
            || magnitude_exp(w).is_some()
            || matches!(w, "hundred" | "and");
        if !cardinal {
            return None;
        }
        k += 1;
    };
    let value = if k == start && (base == "hundred" || magnitude_exp(base).is_some()) {
        10u128.pow(magnitude_exp(base).unwrap_or(2))
    } else {
        let mut rebuilt: Vec<&str> = words[start..k].to_vec();
        rebuilt.push(base);
        let comp = compositional(&rebuilt, 0)?;
        if comp.len != rebuilt.len() || comp.value == 0 {
            return None;
        }
        comp.value
    };
    Some(ParsedNumber {
        value: Decimal::from_int(value),
        style: NumberStyle::Ordinal,
        consumed: k - start + 1,
        leading_zeros: 0,
    })
}

/// Ordinal number words ("first", "twenty ninth", "hundredth"). The value is
/// the cardinal magnitude.
pub fn parse_ordinal(tokens: &[Token], start: usize) -> Option<ParsedNumber> {
    parse_ordinal_words(&lower_words(tokens), start)
}

fn denominator(w: &str, plural: bool) -> Option<u128> {
    let singular = match (plural, w) {
        (false, "half") | (true, "halves") => return Some(2),
        (false, "quarter") | (true, "quarters") => return Some(4),
        (false, s) => s,
        (true, s) => s.strip_suffix('s')?,
    };
    if matches!(singular, "first" | "second") {
        return None;
    }
    let base = ordinal_base(singular)?;
    unit_value(base)
        .or_else(|| teen_value(base))
        .or_else(|| tens_value(base))
        .or_else(|| (base == "hundred").then_some(100))
        .or_else(|| magnitude_exp(base).map(|e| 10u128.pow(e)))
}

pub(crate) fn parse_fraction_words(words: &[&str], start: usize) -> Option<ParsedFraction> {
    let num = compositional(words, start)?;
    if num.value == 0 {
        return None;
    }
    let den = denominator(word_at(words, start + num.len)?, num.value != 1)?;
    Some(ParsedFraction {
        numerator: num.value,
        denominator: den,
        consumed: num.len + 1,
    })
}

/// "one half", "three quarters", "two thirds". A singular denominator is
/// only accepted after "one", which keeps "twenty ninth" an ordinal.
pub fn parse_fraction(tokens: &[Token], start: usize) -> Option<ParsedFraction> {
    parse_fraction_words(&lower_words(tokens), start)
}

fn push_sub100(n: u128, out: &mut Vec<&'static str>) {
    debug_assert!(n < 100);
    if n < 10 {
        out.push(UNITS[n as usize]);
    } else if n < 20 {
        out.push(TEENS[n as usize - 10]);
    } else {
        out.push(TENS[n as usize / 10 - 2]);
        if n % 10 != 0 {
            out.push(UNITS[n as usize % 10]);
        }
    }
}

fn push_sub1000(n: u128, with_and: bool, out: &mut Vec<&'static str>) {
    let (h, r) = (n / 100, n % 100);
    if h > 0 {
        out.push(UNITS[h as usize]);
        out.push("hundred");
        if r > 0 && with_and {
            out.push("and");
        }
    }
    if r > 0 || h == 0 {
        push_sub100(r, out);
    }
}

fn compositional_words(n: u128, with_and: bool) -> Vec<&'static str> {
    if n == 0 {
        return vec!["zero"];
    }
    let mut out = Vec::new();
    let mut rest = n;
    for &(name, exp) in MAGNITUDES.iter().rev() {
        let scale = 10u128.pow(exp);
        let q = rest / scale;
        if q > 0 {
            push_sub1000(q, with_and, &mut out);
            out.push(name);
            rest %= scale;
        }
    }
    if rest > 0 {
        push_sub1000(rest, with_and, &mut out);
    }
    out
}

fn pair_read_words(n: u128) -> Vec<&'static str> {
    let mut out = Vec::new();
    let (high, low) = (n / 100, n % 100);
    push_sub100(high, &mut out);
    match low {
        0 => out.push("hundred"),
        1..=9 => {
            out.push("oh");
            out.push(UNITS[low as usize]);
        }
        _ => push_sub100(low, &mut out),
    }
    out
}

/// Reads a digit string one digit at a time, leading zeros included. A
/// leading zero is always "zero" since "oh" cannot start a number.
pub fn verbalize_digits(digits: &str, zero: ZeroWord) -> Vec<Token> {
    digits
        .bytes()
        .filter(u8::is_ascii_digit)
        .enumerate()
        .map(|(i, b)| {
            let d = (b - b'0') as usize;
            if d == 0 && zero == ZeroWord::Oh && i > 0 {
                Token::new("oh")
            } else {
                Token::new(UNITS[d])
            }
        })
        .collect()
}

fn to_tokens(words: Vec<&str>) -> Vec<Token> {
    words.into_iter().map(Token::new).collect()
}

/// Spells `value` in the requested style. Ordinal values go through
/// [`verbalize_ordinal`] and fractions through [`verbalize_fraction`].
pub fn verbalize_cardinal(value: &Decimal, style: NumberStyle) -> Result<Vec<Token>, NumberError> {
    let err = || inapplicable(value, style);
    let int = value.integer_part();
    let mut words: Vec<&str> = Vec::new();
    match style {
        NumberStyle::Compositional | NumberStyle::CompositionalAnd | NumberStyle::Decimal => {
            if (style == NumberStyle::Decimal) == value.is_integer() || int >= COMPOSITIONAL_LIMIT {
                return Err(err());
            }
            if value.is_negative() {
                words.push("minus");
            }
            words.extend(compositional_words(int, style == NumberStyle::CompositionalAnd));
            if style == NumberStyle::Decimal {
                words.push("point");
                let mut out = to_tokens(words);
                out.extend(verbalize_digits(&value.fraction_digits(), ZeroWord::Zero));
                return Ok(out);
            }
        }
        NumberStyle::PairRead => {
            let n = value.as_u128().filter(|n| (100..=9999).contains(n)).ok_or_else(err)?;
            words = pair_read_words(n);
        }
        NumberStyle::DigitRead => {
            let n = value.as_u128().ok_or_else(err)?;
            return Ok(verbalize_digits(&n.to_string(), ZeroWord::Zero));
        }
        NumberStyle::Ordinal => {
            let n = value.as_u128().ok_or_else(err)?;
            return verbalize_ordinal(n);
        }
        NumberStyle::Fraction => return Err(err()),
    }
    Ok(to_tokens(words))
}

/// "twenty ninth"; exact magnitudes drop the leading "one" ("hundredth").
pub fn verbalize_ordinal(value: u128) -> Result<Vec<Token>, NumberError> {
    if value == 0 || value >= COMPOSITIONAL_LIMIT {
        return Err(inapplicable(value, NumberStyle::Ordinal));
    }
    let mut words = compositional_words(value, false);
    if words.len() == 2 && words[0] == "one" && (words[1] == "hundred" || magnitude_exp(words[1]).is_some()) {
        words.remove(0);
    }
    let last = words.pop().expect("non-empty");
    let ordinal = ORDINALS
        .iter()
        .find(|(_, c)| *c == last)
        .map(|&(o, _)| o)
        .expect("every cardinal word has an ordinal form");
    words.push(ordinal);
    Ok(to_tokens(words))
}

/// "one half", "three quarters", "five eighths". Denominators without a
/// single-word ordinal are inapplicable.
pub fn verbalize_fraction(numerator: u128, denominator: u128) -> Result<Vec<Token>, NumberError> {
    let err = || inapplicable(format!("{numerator}/{denominator}"), NumberStyle::Fraction);
    if numerator == 0 || numerator >= COMPOSITIONAL_LIMIT {
        return Err(err());
    }
    let plural = numerator != 1;
    let den_word = match denominator {
        2 => (if plural { "halves" } else { "half" }).to_string(),
        4 => (if plural { "quarters" } else { "quarter" }).to_string(),
        _ => {
            let words = verbalize_ordinal(denominator).map_err(|_| err())?;
            if words.len() != 1 || denominator < 3 {
                return Err(err());
            }
            let w = words[0].surface();
            if plural {
                format!("{w}s")
            } else {
                w.to_string()
            }
        }
    };
    let mut out = to_tokens(compositional_words(numerator, false));
    out.push(Token::new(den_word));
    Ok(out)
}

/// Year reading: "twenty twelve", "nineteen oh five", but "two thousand
/// five" for 2000..=2009.
pub fn verbalize_year(year: u128) -> Result<Vec<Token>, NumberError> {
    if (2000..=2009).contains(&year) || !(1000..=9999).contains(&year) {
        verbalize_cardinal(&Decimal::from_int(year), NumberStyle::Compositional)
    } else {
        verbalize_cardinal(&Decimal::from_int(year), NumberStyle::PairRead)
    }
}

pub fn ordinal_suffix(n: u128) -> &'static str {
    match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

/// Canonical written digits for a parsed number. Ordinals get an English
/// suffix ("29th").
pub fn render_written(n: &ParsedNumber) -> String {
    if n.style == NumberStyle::Ordinal {
        let v = n.value.integer_part();
        return format!("{v}{}", ordinal_suffix(v));
    }
    let mut out = String::new();
    if n.value.is_negative() {
        out.push('-');
    }
    for _ in 0..n.leading_zeros {
        out.push('0');
    }
    out.push_str(&n.value.integer_part().to_string());
    if !n.value.is_integer() {
        out.push('.');
        out.push_str(&n.value.fraction_digits());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<Token> {
        s.split_whitespace().map(Token::new).collect()
    }

    fn parse(s: &str) -> ParsedNumber {
        parse_number(&toks(s), 0).unwrap_or_else(|| panic!("no parse for {s:?}"))
    }

    fn spoken(words: &[Token]) -> String {
        words.iter().map(Token::surface).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn five_readings_of_2105() {
        for (s, style) in [
            ("two thousand one hundred five", NumberStyle::Compositional),
            ("two thousand one hundred and five", NumberStyle::CompositionalAnd),
            ("twenty one oh five", NumberStyle::PairRead),
            ("two one zero five", NumberStyle::DigitRead),
            ("Two one oh five", NumberStyle::DigitRead),
        ] {
            let n = parse(s);
            assert_eq!(n.value, Decimal::from_int(2105), "{s}");
            assert_eq!(n.consumed, s.split_whitespace().count(), "{s}");
            assert_eq!(n.style, style, "{s}");
            assert_eq!(render_written(&n), "2105");
        }
    }

    #[test]
    fn compositional_head_with_digit_tail() {
        let n = parse("three thousand six four nine point eight four");
        assert_eq!(n.value, "3649.84".parse().unwrap());
        assert_eq!(n.consumed, 8);
        assert_eq!(n.style, NumberStyle::Decimal);
        assert_eq!(render_written(&n), "3649.84");
    }

    #[test]
    fn zero_and_no_match() {
        let n = parse("zero");
        assert_eq!((n.value, n.consumed), (Decimal::ZERO, 1));
        assert_eq!(render_written(&n), "0");
        assert!(parse_number(&toks("hello world"), 0).is_none());
        assert!(parse_number(&toks("oh five"), 0).is_none(), "oh cannot lead");
        assert!(parse_number(&toks("hundred"), 0).is_none());
    }

    #[test]
    fn and_only_after_hundred() {
        let n = parse("two thousand and five");
        assert_eq!((n.value, n.consumed), (Decimal::from_int(2000), 2));
        let n = parse("one hundred and");
        assert_eq!((n.value, n.consumed), (Decimal::from_int(100), 2));
    }

    #[test]
    fn malformed_mixes_stop_early() {
        let n = parse("twenty thousand hundred");
        assert_eq!((n.value, n.consumed), (Decimal::from_int(20_000), 2));
        let n = parse("two thousand five thousand");
        assert_eq!((n.value, n.consumed), (Decimal::from_int(2005), 3));
    }

    #[test]
    fn digit_strings_keep_leading_zeros() {
        let n = parse("zero zero seven");
        assert_eq!(render_written(&n), "007");
        let n = parse("three three nine six oh");
        assert_eq!(render_written(&n), "33960");
    }

    #[test]
    fn minus_prefix() {
        let n = parse("minus five point two");
        assert_eq!(render_written(&n), "-5.2");
        let words = ["five", "minus", "three"];
        assert!(parse_number_words(&words, 1).is_none());
    }

    #[test]
    fn ordinals() {
        let n = parse_ordinal(&toks("twenty ninth"), 0).unwrap();
        assert_eq!((n.value, n.consumed), (Decimal::from_int(29), 2));
        assert_eq!(render_written(&n), "29th");
        let n = parse_ordinal(&toks("first"), 0).unwrap();
        assert_eq!((n.value, n.consumed), (Decimal::from_int(1), 1));
        let n = parse_ordinal(&toks("hundredth"), 0).unwrap();
        assert_eq!((n.value, n.consumed), (Decimal::from_int(100), 1));
        let n = parse_ordinal(&toks("one hundred and first"), 0).unwrap();
        assert_eq!(render_written(&n), "101st");
        assert!(parse_ordinal(&toks("one third"), 0).is_none());
        assert!(parse_ordinal(&toks("twenty dollars"), 0).is_none());
    }

    #[test]
    fn hundredth_round_trips_through_verbalize() {
        let words = verbalize_ordinal(100).unwrap();
        assert_eq!(spoken(&words), "hundredth");
        let n = parse_ordinal(&words, 0).unwrap();
        assert_eq!((n.value, n.consumed), (Decimal::from_int(100), 1));
    }

    #[test]
    fn suffixes() {
        for (n, s) in [(1, "st"), (2, "nd"), (3, "rd"), (4, "th"), (11, "th"), (12, "th"), (13, "th"), (21, "st"), (112, "th"), (103, "rd")] {
            assert_eq!(ordinal_suffix(n), s, "{n}");
        }
    }

    #[test]
    fn fractions() {
        let f = parse_fraction(&toks("three quarters"), 0).unwrap();
        assert_eq!((f.numerator, f.denominator, f.consumed), (3, 4, 2));
        let f = parse_fraction(&toks("one half"), 0).unwrap();
        assert_eq!((f.numerator, f.denominator), (1, 2));
        assert!(parse_fraction(&toks("twenty ninth"), 0).is_none());
        assert!(parse_fraction(&toks("one second"), 0).is_none());
        assert_eq!(spoken(&verbalize_fraction(5, 8).unwrap()), "five eighths");
        assert!(verbalize_fraction(1, 23).is_err());
    }

    #[test]
    fn verbalize_examples() {
        let v = Decimal::from_int(2105);
        assert_eq!(spoken(&verbalize_cardinal(&v, NumberStyle::DigitRead).unwrap()), "two one zero five");
        assert_eq!(spoken(&verbalize_cardinal(&Decimal::ZERO, NumberStyle::Compositional).unwrap()), "zero");
        let words = verbalize_cardinal(&Decimal::from_int(1984), NumberStyle::PairRead).unwrap();
        assert_eq!(spoken(&words), "nineteen eighty four");
        assert_eq!(parse_number(&words, 0).unwrap().value, Decimal::from_int(1984));
        assert_eq!(spoken(&verbalize_digits("2105", ZeroWord::Oh)), "two one oh five");
    }

    #[test]
    fn style_preconditions() {
        let err = verbalize_cardinal(&Decimal::from_int(42), NumberStyle::PairRead).unwrap_err();
        assert!(matches!(err, NumberError::StyleInapplicable { .. }));
        assert!(verbalize_cardinal(&Decimal::from_int(12_345), NumberStyle::PairRead).is_err());
        assert!(verbalize_cardinal(&"1.5".parse().unwrap(), NumberStyle::DigitRead).is_err());
        assert!(verbalize_cardinal(&Decimal::from_int(15), NumberStyle::Decimal).is_err());
        assert!(verbalize_cardinal(&Decimal::from_int(3), NumberStyle::Fraction).is_err());
    }

    #[test]
    fn years() {
        assert_eq!(spoken(&verbalize_year(2012).unwrap()), "twenty twelve");
        assert_eq!(spoken(&verbalize_year(2005).unwrap()), "two thousand five");
        assert_eq!(spoken(&verbalize_year(1905).unwrap()), "nineteen oh five");
        assert_eq!(spoken(&verbalize_year(2020).unwrap()), "twenty twenty");
    }

    fn styles_for(v: u128) -> Vec<NumberStyle> {
        let mut s = vec![NumberStyle::Compositional, NumberStyle::CompositionalAnd, NumberStyle::DigitRead];
        if (100..=9999).contains(&v) {
            s.push(NumberStyle::PairRead);
        }
        s
    }

    proptest! {
        #[test]
        fn cardinal_round_trip(v in 0u128..1_000_000_000) {
            for style in styles_for(v) {
                let words = verbalize_cardinal(&Decimal::from_int(v), style).unwrap();
                let n = parse_number(&words, 0).unwrap();
                prop_assert_eq!(n.value, Decimal::from_int(v), "{} {}", style, spoken(&words));
                prop_assert_eq!(n.consumed, words.len(), "{} {}", style, spoken(&words));
            }
        }

        #[test]
        fn decimal_round_trip(int in 0u128..1_000_000, frac in "[0-9]{1,4}") {
            let v = Decimal::from_parts(int, &frac).unwrap();
            let words = verbalize_cardinal(&v, NumberStyle::Decimal).unwrap();
            let n = parse_number(&words, 0).unwrap();
            prop_assert_eq!(n.value, v);
            prop_assert_eq!(n.consumed, words.len());
            prop_assert_eq!(render_written(&n), v.to_string());
        }

        #[test]
        fn ordinal_round_trip(v in 1u128..10_000_000) {
            let words = verbalize_ordinal(v).unwrap();
            let n = parse_ordinal(&words, 0).unwrap();
            prop_assert_eq!(n.value, Decimal::from_int(v), "{}", spoken(&words));
            prop_assert_eq!(n.consumed, words.len());
        }

        #[test]
        fn longest_match_ignores_trailing_words(v in 0u128..1_000_000_000, tail in prop::sample::select(vec!["dollars", "people", "and", "of", "the"])) {
            let mut words = verbalize_cardinal(&Decimal::from_int(v), NumberStyle::Compositional).unwrap();
            let before = parse_number(&words, 0).unwrap();
            words.push(Token::new(tail));
            let after = parse_number(&words, 0).unwrap();
            prop_assert_eq!(before, after);
        }
    }
}
