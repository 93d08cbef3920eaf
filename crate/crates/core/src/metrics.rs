//! Word error rate split by reference tag: overall WER, I-WER over ITN words
//! and NI-WER over N-ITN words.
//!
//! The hypothesis is aligned to the tagged reference with case-sensitive
//! equality. Substitutions and deletions count against the tag of the
//! reference token involved. An insertion counts against the reference
//! token that precedes it in the alignment, or the first reference token
//! when nothing precedes it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::Serialize;
use thiserror::Error;

use crate::align::{levenshtein_align, EditOp, ItnTag, TaggedReference};
use crate::text::{SemioticClass, Sentence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("reference has no words")]
    EmptyReference,
    #[error("corpus has no sentences")]
    EmptyCorpus,
}

/// Raw counts plus the derived rates. A rate with a zero denominator is
/// `None`. Rates are plain ratios and may exceed 1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EvalReport {
    pub ref_words: usize,
    pub ref_itn_words: usize,
    pub errors_total: usize,
    pub errors_itn: usize,
    pub errors_nitn: usize,
    pub wer: Option<f64>,
    pub i_wer: Option<f64>,
    pub ni_wer: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl EvalReport {
    pub fn from_counts(ref_words: usize, ref_itn_words: usize, errors_itn: usize, errors_nitn: usize) -> EvalReport {
        let errors_total = errors_itn + errors_nitn;
        EvalReport {
            ref_words,
            ref_itn_words,
            errors_total,
            errors_itn,
            errors_nitn,
            wer: ratio(errors_total, ref_words),
            i_wer: ratio(errors_itn, ref_itn_words),
            ni_wer: ratio(errors_nitn, ref_words - ref_itn_words),
        }
    }

    pub fn ref_nitn_words(&self) -> usize {
        self.ref_words - self.ref_itn_words
    }
}

impl Add for EvalReport {
    type Output = EvalReport;

    fn add(self, rhs: EvalReport) -> EvalReport {
        EvalReport::from_counts(
            self.ref_words + rhs.ref_words,
            self.ref_itn_words + rhs.ref_itn_words,
            self.errors_itn + rhs.errors_itn,
            self.errors_nitn + rhs.errors_nitn,
        )
    }
}

impl AddAssign for EvalReport {
    fn add_assign(&mut self, rhs: EvalReport) {
        *self = *self + rhs;
    }
}

pub fn score_sentence(reference: &TaggedReference, hyp: &Sentence) -> Result<EvalReport, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let path = levenshtein_align(&reference.tokens, &hyp.tokens, false);
    let (mut itn, mut nitn) = (0, 0);
    let mut charge = |tag: ItnTag| match tag {
        ItnTag::Itn => itn += 1,
        ItnTag::NonItn => nitn += 1,
    };
    let mut last_ref: Option<usize> = None;
    for op in path.ops {
        match op {
            EditOp::Match(i, _) => last_ref = Some(i),
            EditOp::Substitute(i, _) | EditOp::Delete(i) => {
                charge(reference.tags[i]);
                last_ref = Some(i);
            }
            EditOp::Insert(_) => charge(reference.tags[last_ref.unwrap_or(0)]),
        }
    }
    Ok(EvalReport::from_counts(reference.len(), reference.itn_count(), itn, nitn))
}

/// Micro-averaged corpus report: counts are summed, then divided.
pub fn score_corpus(pairs: &[(TaggedReference, Sentence)]) -> Result<EvalReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    pairs
        .iter()
        .map(|(r, h)| score_sentence(r, h))
        .try_fold(EvalReport::default(), |acc, r| Ok(acc + r?))
}

/// Row groups of the per-usecase breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Usecase {
    Numbers,
    Units,
    DateTime,
    Misc,
}

impl Usecase {
    pub const ALL: [Usecase; 4] = [Usecase::Numbers, Usecase::Units, Usecase::DateTime, Usecase::Misc];

    pub fn of(class: SemioticClass) -> Option<Usecase> {
        match class {
            SemioticClass::Cardinal | SemioticClass::Ordinal | SemioticClass::Fraction | SemioticClass::Decimal => {
                Some(Usecase::Numbers)
            }
            SemioticClass::Currency | SemioticClass::Percent | SemioticClass::Measure => Some(Usecase::Units),
            SemioticClass::Date | SemioticClass::Time | SemioticClass::Year => Some(Usecase::DateTime),
            SemioticClass::Phone => Some(Usecase::Misc),
            SemioticClass::PlainWord => None,
        }
    }
}

impl fmt::Display for Usecase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Usecase::Numbers => "Numbers",
            Usecase::Units => "Units",
            Usecase::DateTime => "Date Time",
            Usecase::Misc => "Misc",
        })
    }
}

/// Adds a sentence report to every usecase its entity classes touch.
pub fn accumulate_usecases(
    into: &mut BTreeMap<Usecase, EvalReport>,
    classes: impl IntoIterator<Item = SemioticClass>,
    report: EvalReport,
) {
    let mut seen: Vec<Usecase> = classes.into_iter().filter_map(Usecase::of).collect();
    seen.sort();
    seen.dedup();
    for u in seen {
        *into.entry(u).or_default() += report;
    }
}
