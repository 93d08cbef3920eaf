//! The rule cascade: tag entity spans in spoken text, then render each span.
//!
//! Tagging scans left to right. At every position each entity recognizer
//! proposes at most one match; the longest wins and equal lengths are broken
//! by [`class_priority`]. Only spoken-form words are ever matched, so text
//! that already contains digits passes through untouched.

use serde::Serialize;

use crate::decimal::Decimal;
use crate::grammar::Grammar;
use crate::number::{
    digit_value, parse_fraction_words, parse_number_words, parse_ordinal_words, render_written, sub100_options,
    unit_value, NumberStyle, ParsedNumber,
};
use crate::text::{join_surfaces, tokenize, SemioticClass, Sentence, Token};

/// A tagged entity over the token range `start..end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    pub class: SemioticClass,
    pub start: usize,
    pub end: usize,
    pub payload: Payload,
}

impl EntitySpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Weekday {
    pub spoken: String,
    pub written: String,
}

/// Parsed semantic content of a span, enough to render it on its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// Cardinal, decimal and year spans.
    Number(ParsedNumber),
    Ordinal(u128),
    Fraction {
        numerator: u128,
        denominator: u128,
    },
    Date {
        weekday: Option<Weekday>,
        month: u8,
        /// Spoken month surface, kept for ordinal-day renders.
        month_word: String,
        day: Option<u8>,
        day_ordinal: bool,
        year: Option<u32>,
    },
    Time {
        hour: u8,
        minute: u8,
        meridiem: Option<String>,
    },
    Currency {
        amount: ParsedNumber,
        symbol: String,
    },
    Percent(ParsedNumber),
    Measure {
        amount: ParsedNumber,
        unit: String,
    },
    Phone {
        digits: String,
    },
}

/// Tie-break rank on equal-length matches; lower wins.
pub fn class_priority(class: SemioticClass) -> usize {
    match class {
        SemioticClass::Phone => 0,
        SemioticClass::Date => 1,
        SemioticClass::Time => 2,
        SemioticClass::Currency => 3,
        SemioticClass::Percent => 4,
        SemioticClass::Measure => 5,
        SemioticClass::Fraction => 6,
        SemioticClass::Ordinal => 7,
        SemioticClass::Decimal => 8,
        SemioticClass::Cardinal | SemioticClass::Year => 9,
        SemioticClass::PlainWord => 10,
    }
}

struct Match {
    class: SemioticClass,
    len: usize,
    payload: Payload,
}

struct Scanner<'a> {
    g: &'a Grammar,
    words: Vec<&'a str>,
}

impl<'a> Scanner<'a> {
    fn word(&self, i: usize) -> Option<&'a str> {
        self.words.get(i).copied()
    }

    fn number(&self, i: usize) -> Option<ParsedNumber> {
        parse_number_words(&self.words, i)
    }

    fn cardinal(&self, i: usize) -> Option<Match> {
        let n = self.number(i)?;
        let class = match n.style {
            NumberStyle::Decimal => SemioticClass::Decimal,
            NumberStyle::PairRead if n.value.as_u128().is_some_and(|v| (1000..=2099).contains(&v)) => {
                SemioticClass::Year
            }
            _ => SemioticClass::Cardinal,
        };
        Some(Match {
            class,
            len: n.consumed,
            payload: Payload::Number(n),
        })
    }

    fn ordinal(&self, i: usize) -> Option<Match> {
        let n = parse_ordinal_words(&self.words, i)?;
        let v = n.value.integer_part();
        if n.consumed == 1 && v < 10 {
            return None;
        }
        Some(Match {
            class: SemioticClass::Ordinal,
            len: n.consumed,
            payload: Payload::Ordinal(v),
        })
    }

    fn fraction(&self, i: usize) -> Option<Match> {
        let f = parse_fraction_words(&self.words, i)?;
        Some(Match {
            class: SemioticClass::Fraction,
            len: f.consumed,
            payload: Payload::Fraction {
                numerator: f.numerator,
                denominator: f.denominator,
            },
        })
    }

    /// Number followed by a lexicon phrase: currency, percent, measure.
    fn suffixed(&self, i: usize) -> Option<Match> {
        let n = self.number(i)?;
        let j = i + n.consumed;
        let mut best: Option<Match> = None;
        let mut offer = |m: Match| {
            let better = best
                .as_ref()
                .is_none_or(|b| m.len > b.len || (m.len == b.len && class_priority(m.class) < class_priority(b.class)));
            if better {
                best = Some(m);
            }
        };
        if let Some((symbol, len)) = self.g.currency().longest_at(&self.words, j) {
            offer(Match {
                class: SemioticClass::Currency,
                len: n.consumed + len,
                payload: Payload::Currency {
                    amount: n.clone(),
                    symbol: symbol.clone(),
                },
            });
        }
        if let Some((_, len)) = self.g.percent().longest_at(&self.words, j) {
            offer(Match {
                class: SemioticClass::Percent,
                len: n.consumed + len,
                payload: Payload::Percent(n.clone()),
            });
        }
        if let Some((unit, len)) = self.g.units().longest_at(&self.words, j) {
            offer(Match {
                class: SemioticClass::Measure,
                len: n.consumed + len,
                payload: Payload::Measure {
                    amount: n.clone(),
                    unit: unit.clone(),
                },
            });
        }
        best
    }

    fn phone(&self, i: usize) -> Option<Match> {
        let patterns = self.g.phone_patterns();
        if patterns.is_empty() {
            return None;
        }
        let mut digits = String::new();
        let mut k = i;
        let mut best = None;
        loop {
            let Some(w) = self.word(k) else { break };
            let allow_oh = !digits.is_empty();
            if let (Some(d), Some("hundred")) = (unit_value(w).filter(|&d| d > 0), self.word(k + 1)) {
                digits.push_str(&format!("{d}00"));
                k += 2;
            } else if let Some(d) = digit_value(w, allow_oh) {
                digits.push(char::from(b'0' + d as u8));
                k += 1;
            } else {
                break;
            }
            if patterns.contains_key(&digits.len()) {
                best = Some((digits.clone(), k - i));
            }
        }
        let (digits, len) = best?;
        Some(Match {
            class: SemioticClass::Phone,
            len,
            payload: Payload::Phone { digits },
        })
    }

    fn year(&self, i: usize) -> Option<(u32, usize)> {
        let n = self.number(i)?;
        let ok_style = matches!(
            n.style,
            NumberStyle::PairRead | NumberStyle::Compositional | NumberStyle::CompositionalAnd
        );
        let v = n.value.as_u128().filter(|v| (1000..=2099).contains(v))?;
        (ok_style && n.leading_zeros == 0).then_some((v as u32, n.consumed))
    }

    fn date(&self, i: usize) -> Option<Match> {
        let (weekday, wlen) = match self.g.weekdays().longest_at(&self.words, i) {
            Some((written, len)) => (
                Some(Weekday {
                    spoken: self.words[i..i + len].join(" "),
                    written: written.clone(),
                }),
                len,
            ),
            None => (None, 0),
        };
        let m = i + wlen;
        let (&month, mlen) = self.g.months().longest_at(&self.words, m)?;
        let month_word = self.words[m..m + mlen].join(" ");
        let d = m + mlen;

        // (day, ordinal, day_len)
        let mut days: Vec<(Option<u8>, bool, usize)> = vec![(None, false, 0)];
        for (v, len) in sub100_options(&self.words, d) {
            if (1..=31).contains(&v) {
                days.push((Some(v as u8), false, len));
            }
        }
        if let Some(o) = parse_ordinal_words(&self.words, d) {
            let v = o.value.integer_part();
            if (1..=31).contains(&v) {
                days.push((Some(v as u8), true, o.consumed));
            }
        }
        let mut best: Option<(usize, Payload)> = None;
        for (day, day_ordinal, dlen) in days {
            let year = self.year(d + dlen);
            if day.is_none() && year.is_none() {
                continue;
            }
            let ylen = year.map_or(0, |(_, l)| l);
            let len = wlen + mlen + dlen + ylen;
            if best.as_ref().is_none_or(|(b, _)| len > *b) {
                best = Some((
                    len,
                    Payload::Date {
                        weekday: weekday.clone(),
                        month,
                        month_word: month_word.clone(),
                        day,
                        day_ordinal,
                        year: year.map(|(y, _)| y),
                    },
                ));
            }
        }
        let (len, payload) = best?;
        Some(Match {
            class: SemioticClass::Date,
            len,
            payload,
        })
    }

    fn minutes(&self, i: usize) -> Option<(u8, usize)> {
        if self.word(i) == Some("oh") {
            let d = self.word(i + 1).and_then(unit_value).filter(|&d| d > 0)?;
            return Some((d as u8, 2));
        }
        sub100_options(&self.words, i)
            .into_iter()
            .find(|&(v, _)| (10..=59).contains(&v))
            .map(|(v, len)| (v as u8, len))
    }

    fn meridiem(&self, i: usize) -> Option<(String, usize)> {
        self.g.meridiem().longest_at(&self.words, i).map(|(m, len)| (m.clone(), len))
    }

    /// `connected` is true when the previous span is a Time separated from
    /// `i` by exactly one connector word.
    fn time(&self, i: usize, connected: bool) -> Option<Match> {
        let time = |hour: u8, minute: u8, meridiem: Option<String>, len: usize| Match {
            class: SemioticClass::Time,
            len,
            payload: Payload::Time { hour, minute, meridiem },
        };
        if let Some((clock, len)) = self.g.time_words().longest_at(&self.words, i) {
            return Some(time(clock.hour, clock.minute, clock.meridiem.clone(), len));
        }
        let triggered = i > 0 && self.g.is_time_trigger(self.words[i - 1]);
        let mut best: Option<Match> = None;
        let mut offer = |m: Match| {
            if best.as_ref().is_none_or(|b| m.len > b.len) {
                best = Some(m);
            }
        };
        for (h, hlen) in sub100_options(&self.words, i) {
            if h > 23 {
                continue;
            }
            let h = h as u8;
            let j = i + hlen;
            if let Some((min, mlen)) = self.minutes(j) {
                let k = j + mlen;
                match self.meridiem(k) {
                    Some((mer, len)) if (1..=12).contains(&h) => offer(time(h, min, Some(mer), hlen + mlen + len)),
                    _ => {
                        let zone = self.word(k).is_some_and(|w| self.g.is_timezone(w));
                        if zone || triggered || connected {
                            offer(time(h, min, None, hlen + mlen));
                        }
                    }
                }
            }
            if let Some((_, slen)) = self.g.clock_suffix().longest_at(&self.words, j) {
                match self.meridiem(j + slen) {
                    Some((mer, len)) if (1..=12).contains(&h) => offer(time(h, 0, Some(mer), hlen + slen + len)),
                    _ => offer(time(h, 0, None, hlen + slen)),
                }
            }
            if (1..=12).contains(&h) {
                if let Some((mer, len)) = self.meridiem(j) {
                    offer(time(h, 0, Some(mer), hlen + len));
                }
                if connected {
                    offer(time(h, 0, None, hlen));
                }
            }
        }
        best
    }
}

/// Tags entity spans in `s`. Spans are sorted and never overlap.
pub fn tag(g: &Grammar, s: &Sentence) -> Vec<EntitySpan> {
    let scanner = Scanner {
        g,
        words: s.tokens.iter().map(Token::lower).collect(),
    };
    let n = scanner.words.len();
    let mut spans: Vec<EntitySpan> = Vec::new();
    let mut i = 0;
    while i < n {
        let connected = spans.last().is_some_and(|p| {
            p.class == SemioticClass::Time && p.end + 1 == i && g.is_time_connector(scanner.words[p.end])
        });
        let candidates = [
            scanner.phone(i),
            scanner.date(i),
            scanner.time(i, connected),
            scanner.suffixed(i),
            scanner.fraction(i),
            scanner.ordinal(i),
            scanner.cardinal(i),
        ];
        let best = candidates.into_iter().flatten().reduce(|best, m| {
            if m.len > best.len || (m.len == best.len && class_priority(m.class) < class_priority(best.class)) {
                m
            } else {
                best
            }
        });
        match best {
            Some(m) => {
                spans.push(EntitySpan {
                    class: m.class,
                    start: i,
                    end: i + m.len,
                    payload: m.payload,
                });
                i += m.len;
            }
            None => i += 1,
        }
    }
    spans
}

fn apply_mask(mask: &str, digits: &str) -> String {
    let mut it = digits.chars();
    mask.chars()
        .map(|c| if c == 'X' { it.next().unwrap_or('X') } else { c })
        .collect()
}

/// Written form of a span, or `None` when the payload cannot be rendered
/// with this grammar.
pub fn render(g: &Grammar, span: &EntitySpan) -> Option<String> {
    let out = match &span.payload {
        Payload::Number(n) => render_written(n),
        Payload::Ordinal(v) => render_written(&ParsedNumber {
            value: Decimal::from_int(*v),
            style: NumberStyle::Ordinal,
            consumed: 1,
            leading_zeros: 0,
        }),
        Payload::Fraction { numerator, denominator } => format!("{numerator}/{denominator}"),
        Payload::Date {
            weekday,
            month,
            month_word,
            day,
            day_ordinal,
            year,
        } => {
            let mut parts: Vec<String> = Vec::new();
            if *day_ordinal {
                if let Some(w) = weekday {
                    parts.push(w.spoken.clone());
                }
                parts.push(month_word.clone());
                parts.extend(day.map(|d| d.to_string()));
                parts.extend(year.map(|y| y.to_string()));
                parts.join(" ")
            } else {
                let name = g.month_name(*month)?;
                let mut out = String::new();
                if let Some(w) = weekday {
                    out.push_str(&w.written);
                    out.push_str(", ");
                }
                out.push_str(name);
                match (day, year) {
                    (Some(d), Some(y)) => out.push_str(&format!(" {d}, {y}")),
                    (Some(d), None) => out.push_str(&format!(" {d}")),
                    (None, Some(y)) => out.push_str(&format!(" {y}")),
                    (None, None) => return None,
                }
                out
            }
        }
        Payload::Time { hour, minute, meridiem } => {
            if *hour > 23 || *minute > 59 {
                return None;
            }
            match meridiem {
                Some(m) => format!("{hour}:{minute:02} {m}"),
                None => format!("{hour}:{minute:02}"),
            }
        }
        Payload::Currency { amount, symbol } => format!("{symbol}{}", render_written(amount)),
        Payload::Percent(n) => format!("{}%", render_written(n)),
        Payload::Measure { amount, unit } => format!("{} {unit}", render_written(amount)),
        Payload::Phone { digits } => match g.phone_patterns().get(&digits.len()) {
            Some(mask) => apply_mask(mask, digits),
            None => digits.clone(),
        },
    };
    Some(out)
}

/// Written-form pieces of `s` in source order: one per rendered span and one
/// per plain token.
pub fn render_pieces(g: &Grammar, s: &Sentence, spans: &[EntitySpan]) -> Vec<String> {
    let mut pieces = Vec::with_capacity(s.len());
    let mut i = 0;
    for span in spans {
        pieces.extend(s.tokens[i..span.start].iter().map(|t| t.surface().to_string()));
        match render(g, span) {
            Some(text) => pieces.push(text),
            None => {
                log::warn!("cannot render {} span {}..{}; copying source", span.class, span.start, span.end);
                pieces.extend(s.tokens[span.start..span.end].iter().map(|t| t.surface().to_string()));
            }
        }
        i = span.end;
    }
    pieces.extend(s.tokens[i..].iter().map(|t| t.surface().to_string()));
    pieces
}

/// Spoken to written form. Tokens outside entity spans are copied verbatim.
pub fn itn(g: &Grammar, spoken: &str) -> String {
    let s = tokenize(spoken);
    let spans = tag(g, &s);
    let pieces = render_pieces(g, &s, &spans);
    join_surfaces(pieces.iter().map(String::as_str))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Grammar {
        Grammar::english()
    }

    fn classes(text: &str) -> Vec<SemioticClass> {
        tag(&g(), &tokenize(text)).iter().map(|s| s.class).collect()
    }

    #[test]
    fn number_variants_date_and_mixed() {
        let g = g();
        for v in [
            "two thousand one hundred five",
            "two thousand one hundred and five",
            "twenty one oh five",
            "two one zero five",
            "two one oh five",
        ] {
            assert_eq!(itn(&g, v), "2105", "{v}");
        }
        assert_eq!(itn(&g, "october twenty twenty twenty"), "October 20, 2020");
        assert_eq!(
            itn(&g, "four percent of five dollars is twenty cents"),
            "4% of $5 is 20 cents"
        );
    }

    #[test]
    fn phone_times_currency_and_date_fragment() {
        let g = g();
        assert_eq!(
            itn(&g, "contact number for us is one eight hundred two five five seven eight two eight"),
            "contact number for us is 1-800-255-7828"
        );
        assert_eq!(itn(&g, "not at noon or two or four"), "not at 12:00 pm or 2:00 or 4:00");
        assert_eq!(
            itn(&g, "it was priced at three thousand six four nine point eight four dollars"),
            "it was priced at $3649.84"
        );
        assert_eq!(
            itn(&g, "ten twenty nine gmt november twenty ninth twenty twelve"),
            "10:29 gmt november 29 2012"
        );
    }

    #[test]
    fn date_span_payload() {
        let spans = tag(&g(), &tokenize("october twenty twenty twenty"));
        assert_eq!(spans.len(), 1);
        match &spans[0].payload {
            Payload::Date { month, day, year, .. } => assert_eq!((*month, *day, *year), (10, Some(20), Some(2020))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plain_text_is_untouched() {
        assert!(classes("hello world").is_empty());
        assert_eq!(itn(&g(), "no numbers here"), "no numbers here");
        assert_eq!(itn(&g(), ""), "");
    }

    #[test]
    fn date_shapes() {
        let g = g();
        assert_eq!(itn(&g, "monday october twenty twenty twenty"), "Monday, October 20, 2020");
        assert_eq!(itn(&g, "october twenty"), "October 20");
        assert_eq!(itn(&g, "in october twenty twenty"), "in October 2020");
        assert_eq!(itn(&g, "july fourth"), "july 4");
        assert_eq!(itn(&g, "march"), "march");
    }

    #[test]
    fn time_shapes() {
        let g = g();
        assert_eq!(itn(&g, "seven thirty p m"), "7:30 pm");
        assert_eq!(itn(&g, "seven p m"), "7:00 pm");
        assert_eq!(itn(&g, "ten oh five a m"), "10:05 am");
        assert_eq!(itn(&g, "four o'clock"), "4:00");
        assert_eq!(itn(&g, "meet at ten thirty"), "meet at 10:30");
        assert_eq!(itn(&g, "midnight"), "12:00 am");
        assert_eq!(itn(&g, "ten thirty"), "1030");
        assert_eq!(itn(&g, "meet at two"), "meet at 2");
    }

    #[test]
    fn other_classes() {
        let g = g();
        assert_eq!(itn(&g, "three quarters"), "3/4");
        assert_eq!(itn(&g, "the twenty first century"), "the 21st century");
        assert_eq!(itn(&g, "the first time"), "the first time");
        assert_eq!(itn(&g, "five kilometers"), "5 km");
        assert_eq!(itn(&g, "minus four point five"), "-4.5");
        assert_eq!(itn(&g, "one dollar"), "$1");
        assert_eq!(itn(&g, "twenty pounds"), "£20");
        assert_eq!(itn(&g, "nineteen eighty four"), "1984");
        assert_eq!(classes("nineteen eighty four"), [SemioticClass::Year]);
        assert_eq!(classes("two point five"), [SemioticClass::Decimal]);
    }

    #[test]
    fn punctuation_blocks_entities() {
        assert_eq!(itn(&g(), "he said, \"five\"."), "he said, \"5\".");
        assert_eq!(itn(&g(), "one, two"), "1, 2");
    }

    #[test]
    fn written_text_is_left_alone() {
        let g = g();
        for w in [
            "it was priced at $3649.84",
            "12:00 pm or 2:00 or 4:00",
            "October 20, 2020",
            "call 1-800-255-7828 now",
        ] {
            assert_eq!(itn(&g, w), w);
        }
    }

    #[test]
    fn phone_disabled_without_patterns() {
        let docs = [crate::grammar::LexiconDocument::new("x.toml", "schema_version = 1\n")];
        let bare = crate::grammar::compile_grammar(&docs).unwrap();
        let out = itn(&bare, "one eight hundred two five five seven eight two eight");
        assert_ne!(out, "1-800-255-7828");
    }

    #[test]
    fn render_fails_open() {
        let g = g();
        let s = tokenize("at twenty five");
        let span = EntitySpan {
            class: SemioticClass::Time,
            start: 1,
            end: 3,
            payload: Payload::Time {
                hour: 25,
                minute: 0,
                meridiem: None,
            },
        };
        assert_eq!(render(&g, &span), None);
        assert_eq!(render_pieces(&g, &s, &[span]), ["at", "twenty", "five"]);
    }
}
