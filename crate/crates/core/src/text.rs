//! Tokens, sentences and the tokenizer shared by every other module.
//!
//! Tokenization is whitespace-first. Each whitespace chunk then has leading
//! opening punctuation and trailing closing punctuation peeled off into
//! separate tokens. Punctuation inside a chunk stays put, so `3649.84`,
//! `10:29`, `1-800-255-7828` and `don't` remain single tokens, and `$` / `%`
//! stay attached to their digits (`$5`, `4%`).

use std::fmt;

use serde::{Deserialize, Serialize};

/// Characters peeled from the front of a chunk.
const OPENERS: &[char] = &['(', '[', '{', '"', '\u{201c}', '\u{2018}', '\u{ab}'];

/// Characters peeled from the back of a chunk.
const CLOSERS: &[char] = &[
    ',', '.', '!', '?', ';', ':', ')', ']', '}', '"', '\u{201d}', '\u{2019}', '\u{bb}', '\u{2026}',
];

/// Every character that counts as punctuation for [`TokenKind::Punctuation`].
const PUNCTUATION: &[char] = &[
    ',', '.', '!', '?', ';', ':', '"', '\'', '(', ')', '[', ']', '{', '}', '-', '\u{2013}', '\u{2014}',
    '\u{201c}', '\u{201d}', '\u{2018}', '\u{2019}', '\u{ab}', '\u{bb}', '\u{2026}',
];

pub fn is_punctuation_char(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    surface: String,
    lower: String,
    kind: TokenKind,
}

impl Token {
    /// Builds a token from a surface string.
    ///
    /// Panics if `surface` is empty or contains whitespace; tokens always come
    /// from a whitespace split, so either would be a caller bug.
    pub fn new(surface: impl Into<String>) -> Token {
        let surface = surface.into();
        assert!(
            !surface.is_empty() && !surface.chars().any(char::is_whitespace),
            "token surface must be non-empty without whitespace: {surface:?}"
        );
        let lower = surface.to_lowercase();
        let kind = classify(&surface);
        Token { surface, lower, kind }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    /// Case-folded surface.
    pub fn lower(&self) -> &str {
        &self.lower
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn is_punctuation(&self) -> bool {
        self.kind == TokenKind::Punctuation
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

fn classify(surface: &str) -> TokenKind {
    if surface.chars().all(is_punctuation_char) {
        TokenKind::Punctuation
    } else if surface.chars().any(|c| c.is_ascii_digit()) {
        TokenKind::Number
    } else if surface.chars().any(char::is_alphabetic) {
        TokenKind::Word
    } else {
        TokenKind::Symbol
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub raw: String,
}

impl Sentence {
    pub fn from_tokens(tokens: Vec<Token>) -> Sentence {
        let raw = join_surfaces(tokens.iter().map(Token::surface));
        Sentence { tokens, raw }
    }

    /// Whitespace-only split with punctuation left attached (`20,` stays one
    /// word). This is the word notion used for scoring.
    pub fn words(text: &str) -> Sentence {
        Sentence {
            tokens: text.split_whitespace().map(Token::new).collect(),
            raw: text.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Copy of the sentence with every punctuation token removed.
    pub fn without_punctuation(&self) -> Sentence {
        Sentence::from_tokens(self.tokens.iter().filter(|t| !t.is_punctuation()).cloned().collect())
    }
}

/// The entity categories the rule engine can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemioticClass {
    Cardinal,
    Ordinal,
    Fraction,
    Decimal,
    Year,
    Date,
    Time,
    Currency,
    Percent,
    Measure,
    Phone,
    PlainWord,
}

impl SemioticClass {
    pub const ALL: [SemioticClass; 12] = [
        SemioticClass::Cardinal,
        SemioticClass::Ordinal,
        SemioticClass::Fraction,
        SemioticClass::Decimal,
        SemioticClass::Year,
        SemioticClass::Date,
        SemioticClass::Time,
        SemioticClass::Currency,
        SemioticClass::Percent,
        SemioticClass::Measure,
        SemioticClass::Phone,
        SemioticClass::PlainWord,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemioticClass::Cardinal => "cardinal",
            SemioticClass::Ordinal => "ordinal",
            SemioticClass::Fraction => "fraction",
            SemioticClass::Decimal => "decimal",
            SemioticClass::Year => "year",
            SemioticClass::Date => "date",
            SemioticClass::Time => "time",
            SemioticClass::Currency => "currency",
            SemioticClass::Percent => "percent",
            SemioticClass::Measure => "measure",
            SemioticClass::Phone => "phone",
            SemioticClass::PlainWord => "plain_word",
        }
    }
}

impl fmt::Display for SemioticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn tokenize(text: &str) -> Sentence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut tokens);
    }
    Sentence {
        tokens,
        raw: text.to_string(),
    }
}

fn split_chunk(chunk: &str, out: &mut Vec<Token>) {
    let chars: Vec<(usize, char)> = chunk.char_indices().collect();
    let mut lo = 0;
    let mut hi = chars.len();
    while lo < hi && OPENERS.contains(&chars[lo].1) {
        lo += 1;
    }
    while hi > lo && CLOSERS.contains(&chars[hi - 1].1) {
        hi -= 1;
    }
    for &(_, c) in &chars[..lo] {
        out.push(Token::new(c.to_string()));
    }
    if lo < hi {
        let start = chars[lo].0;
        let end = chars.get(hi).map_or(chunk.len(), |&(i, _)| i);
        out.push(Token::new(&chunk[start..end]));
    }
    for &(_, c) in &chars[hi..] {
        out.push(Token::new(c.to_string()));
    }
}

pub fn detokenize(s: &Sentence) -> String {
    join_surfaces(s.tokens.iter().map(Token::surface))
}

/// Joins token surfaces with single spaces, reattaching punctuation:
/// closers take no preceding space, openers take no following space, and
/// straight double quotes alternate between opening and closing.
pub fn join_surfaces<'a>(pieces: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    let mut glue_next = true;
    let mut quote_open = false;
    for piece in pieces {
        let role = if piece == "\"" {
            quote_open = !quote_open;
            if quote_open {
                Role::Opener
            } else {
                Role::Closer
            }
        } else {
            role_of(piece)
        };
        match role {
            Role::Closer => {
                out.push_str(piece);
                glue_next = false;
            }
            Role::Opener => {
                if !glue_next {
                    out.push(' ');
                }
                out.push_str(piece);
                glue_next = true;
            }
            Role::Plain => {
                if !glue_next {
                    out.push(' ');
                }
                out.push_str(piece);
                glue_next = false;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Opener,
    Closer,
    Plain,
}

fn role_of(piece: &str) -> Role {
    let mut chars = piece.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c != '"' && OPENERS.contains(&c) => Role::Opener,
        (Some(c), None) if c != '"' && CLOSERS.contains(&c) => Role::Closer,
        _ => Role::Plain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(s: &Sentence) -> Vec<&str> {
        s.tokens.iter().map(Token::surface).collect()
    }

    #[test]
    fn date_comma_is_split() {
        let s = tokenize("October 20, 2020");
        assert_eq!(surfaces(&s), ["October", "20", ",", "2020"]);
        assert_eq!(s.tokens[2].kind(), TokenKind::Punctuation);
        assert_eq!(s.tokens[1].kind(), TokenKind::Number);
        assert_eq!(s.tokens[0].lower(), "october");
    }

    #[test]
    fn currency_and_percent_stay_attached() {
        let s = tokenize("4% of $5 is 20 cents");
        assert_eq!(surfaces(&s), ["4%", "of", "$5", "is", "20", "cents"]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
        assert_eq!(detokenize(&Sentence::default()), "");
    }

    #[test]
    fn detokenize_reattaches() {
        let s = Sentence::from_tokens(["October", "20", ",", "2020"].map(Token::new).to_vec());
        assert_eq!(detokenize(&s), "October 20, 2020");
        let s = Sentence::from_tokens(["he", "said", ",", "\"", "hi", "\""].map(Token::new).to_vec());
        assert_eq!(detokenize(&s), "he said, \"hi\"");
        let s = Sentence::from_tokens(["(", "see", "above", ")", "."].map(Token::new).to_vec());
        assert_eq!(detokenize(&s), "(see above).");
    }

    #[test]
    fn inner_punctuation_is_kept() {
        let s = tokenize("call 1-800-255-7828 at 10:29, it's $3649.84.");
        assert_eq!(
            surfaces(&s),
            ["call", "1-800-255-7828", "at", "10:29", ",", "it's", "$3649.84", "."]
        );
    }

    #[test]
    fn kinds() {
        assert_eq!(Token::new("$").kind(), TokenKind::Symbol);
        assert_eq!(Token::new("--").kind(), TokenKind::Punctuation);
        assert_eq!(Token::new("mp3").kind(), TokenKind::Number);
        assert_eq!(Token::new("Hello").kind(), TokenKind::Word);
    }

    #[test]
    fn words_keeps_attached_punctuation() {
        let s = Sentence::words("October 20, 2020");
        assert_eq!(surfaces(&s), ["October", "20,", "2020"]);
    }

    proptest! {
        #[test]
        fn lowercase_words_round_trip(words in prop::collection::vec("[a-z]{1,8}", 0..12)) {
            let s = words.join(" ");
            prop_assert_eq!(detokenize(&tokenize(&s)), s);
        }

        #[test]
        fn tokenize_is_idempotent_under_detokenize(s in "[a-z\"(),.!? ]{0,30}") {
            let once = tokenize(&s);
            let twice = tokenize(&detokenize(&once));
            prop_assert_eq!(surfaces(&once), surfaces(&twice));
        }

        #[test]
        fn lower_is_case_folded(s in "[A-Za-z0-9$%]{1,10}") {
            let t = Token::new(s.clone());
            prop_assert_eq!(t.lower(), s.to_lowercase());
        }
    }
}
