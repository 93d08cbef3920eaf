//! Levenshtein alignment between token sequences, and the two things built
//! on it: restoring punctuation into spoken text and tagging written
//! references as ITN / N-ITN.

use serde::Serialize;

use crate::text::{join_surfaces, Sentence, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditOp {
    Match(usize, usize),
    Substitute(usize, usize),
    /// `a[i]` has no counterpart in `b`.
    Delete(usize),
    /// `b[j]` has no counterpart in `a`.
    Insert(usize),
}

impl EditOp {
    pub fn cost(self) -> usize {
        match self {
            EditOp::Match(..) => 0,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentPath {
    pub ops: Vec<EditOp>,
}

impl AlignmentPath {
    pub fn cost(&self) -> usize {
        self.ops.iter().map(|op| op.cost()).sum()
    }

    pub fn matches(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, EditOp::Match(..))).count()
    }
}

/// Minimal unit-cost alignment of `a` onto `b` under `eq`.
///
/// Costs are computed over suffixes and the path is read off front to back,
/// taking match/substitute, then delete, then insert whenever that choice
/// stays on a minimal path. Substitutions therefore land on the first token
/// of a rewritten run and insertions or deletions follow it.
pub fn align_by<A, B>(a: &[A], b: &[B], eq: impl Fn(&A, &B) -> bool) -> AlignmentPath {
    let (m, n) = (a.len(), b.len());
    let w = n + 1;
    let mut d = vec![0usize; (m + 1) * w];
    for i in (0..=m).rev() {
        for j in (0..=n).rev() {
            d[i * w + j] = if i == m {
                n - j
            } else if j == n {
                m - i
            } else {
                let diag = d[(i + 1) * w + j + 1] + usize::from(!eq(&a[i], &b[j]));
                diag.min(d[(i + 1) * w + j] + 1).min(d[i * w + j + 1] + 1)
            };
        }
    }
    let mut ops = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (0, 0);
    while i < m || j < n {
        let here = d[i * w + j];
        if i < m && j < n {
            let same = eq(&a[i], &b[j]);
            if here == d[(i + 1) * w + j + 1] + usize::from(!same) {
                ops.push(if same { EditOp::Match(i, j) } else { EditOp::Substitute(i, j) });
                i += 1;
                j += 1;
                continue;
            }
        }
        if i < m && here == d[(i + 1) * w + j] + 1 {
            ops.push(EditOp::Delete(i));
            i += 1;
        } else {
            ops.push(EditOp::Insert(j));
            j += 1;
        }
    }
    AlignmentPath { ops }
}

/// Aligns token surfaces, optionally ignoring case.
pub fn levenshtein_align(a: &[Token], b: &[Token], case_insensitive: bool) -> AlignmentPath {
    if case_insensitive {
        align_by(a, b, |x, y| x.lower() == y.lower())
    } else {
        align_by(a, b, |x, y| x.surface() == y.surface())
    }
}

/// Reinserts every punctuation token of `written` into `spoken`.
///
/// The non-punctuation written tokens are aligned to the spoken tokens. The
/// punctuation sitting between written words `k-1` and `k` goes in front of
/// the first spoken token aligned to a written word at or after `k`, which
/// keeps it after any tokens a rewritten entity expanded into. Marks keep
/// their written order.
pub fn restore_punctuation(written: &Sentence, spoken: &Sentence) -> Sentence {
    let mut words: Vec<&Token> = Vec::new();
    let mut gaps: Vec<Vec<&Token>> = vec![Vec::new()];
    for t in &written.tokens {
        if t.is_punctuation() {
            gaps.last_mut().expect("non-empty").push(t);
        } else {
            words.push(t);
            gaps.push(Vec::new());
        }
    }
    let path = align_by(&words, &spoken.tokens, |w, s| w.lower() == s.lower());
    let mut aligned: Vec<Option<usize>> = vec![None; words.len()];
    for op in &path.ops {
        if let EditOp::Match(i, j) | EditOp::Substitute(i, j) = *op {
            aligned[i] = Some(j);
        }
    }
    // First spoken index aligned at or after each written word.
    let mut next = vec![spoken.len(); words.len() + 1];
    for k in (0..words.len()).rev() {
        next[k] = aligned[k].unwrap_or(next[k + 1]).min(next[k + 1]);
    }
    let mut at: Vec<Vec<&Token>> = vec![Vec::new(); spoken.len() + 1];
    for (k, gap) in gaps.into_iter().enumerate() {
        at[next[k]].extend(gap);
    }
    let mut tokens = Vec::with_capacity(spoken.len() + written.len());
    for (j, marks) in at.into_iter().enumerate() {
        tokens.extend(marks.into_iter().cloned());
        if let Some(t) = spoken.tokens.get(j) {
            tokens.push(t.clone());
        }
    }
    let raw = join_surfaces(tokens.iter().map(Token::surface));
    Sentence { tokens, raw }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ItnTag {
    #[serde(rename = "ITN")]
    Itn,
    #[serde(rename = "N-ITN")]
    NonItn,
}

/// Written reference tokens, each tagged ITN or N-ITN.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedReference {
    pub tokens: Vec<Token>,
    pub tags: Vec<ItnTag>,
}

impl TaggedReference {
    pub fn itn_count(&self) -> usize {
        self.tags.iter().filter(|&&t| t == ItnTag::Itn).count()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tags each written token N-ITN when the spoken/written alignment matches
/// it (case-insensitively) and ITN otherwise.
pub fn tag_itn(spoken: &Sentence, written: &Sentence) -> TaggedReference {
    let path = levenshtein_align(&spoken.tokens, &written.tokens, true);
    let mut tags = vec![ItnTag::Itn; written.len()];
    for op in path.ops {
        if let EditOp::Match(_, j) = op {
            tags[j] = ItnTag::NonItn;
        }
    }
    TaggedReference {
        tokens: written.tokens.clone(),
        tags,
    }
}
