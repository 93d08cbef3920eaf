//! Inverse text normalization toolkit.
//!
//! The crate is organised around a deterministic rule cascade that turns
//! spoken-form ASR output ("twenty twelve") into written form ("2012"), plus
//! the supporting machinery needed to build and evaluate ITN systems:
//!
//! * [`text`]: tokenization shared by every other module.
//! * [`number`]: number-word grammar in both directions.
//! * [`grammar`]: declarative lexicon files and their compiled form.
//! * [`itn`]: entity tagging and written-form rendering.
//! * [`tn`]: written to spoken normalization for parallel data.
//! * [`align`]: Levenshtein alignment, punctuation restoration, ITN tagging.
//! * [`metrics`]: WER split into ITN and non-ITN parts.
//! * [`datagen`]: corpus manufacturing and statistics.
//! * [`hybrid`]: confidence-gated neural backend plus rule second pass.

pub mod align;
pub mod datagen;
pub mod decimal;
pub mod grammar;
pub mod hybrid;
pub mod itn;
pub mod metrics;
pub mod number;
pub mod text;
pub mod tn;

pub use align::{levenshtein_align, restore_punctuation, tag_itn, AlignmentPath, EditOp, ItnTag, TaggedReference};
pub use decimal::Decimal;
pub use grammar::{compile_grammar, Grammar, GrammarError, LexiconDocument};
pub use itn::{itn, render, tag, EntitySpan, Payload};
pub use metrics::{score_corpus, score_sentence, EvalReport, MetricsError, Usecase};
pub use number::{parse_number, parse_ordinal, render_written, verbalize_cardinal, NumberStyle, ParsedNumber};
pub use text::{detokenize, tokenize, SemioticClass, Sentence, Token, TokenKind};
pub use tn::{expand_abbreviation, tn, Expansion, TnResult, TnRule};
pub use datagen::{build_corpus, corpus_stats, gen_cardinal_variants, CorpusStats, ParallelPair, Provenance};
pub use hybrid::{hybrid_itn, Backend, BackendError, BackendResponse, Decision, Endpoint, Hybrid, HybridConfig, HybridOutput};
