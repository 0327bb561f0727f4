//! Corpus curation and quality-aware data augmentation for code-mixed text.
//!
//! The crate covers the full batch workflow: tokenization and per-token
//! language tagging, code-mixing metrics (CMI, switch-point fraction),
//! two-stage identification with an ensemble vote, PII redaction with a
//! discard policy, a six-filter quality bank, JSONL corpus management with
//! seeded splits, a checkpointed three-stage augmentation pipeline, and a
//! statistical evaluation harness. The `examples/` directory holds one
//! runnable walkthrough per capability; the `codemix` binary exposes the
//! same operations as subcommands.

pub mod backend;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod evalstats;
pub mod filters;
pub mod lid;
pub mod metrics;
pub mod pii;
pub mod pipeline;
pub mod textcore;

pub use config::ToolConfig;
pub use corpus::{Post, SplitSpec};
pub use filters::{FilterConfig, ParallelPair};
pub use metrics::{cmi, sentence_stats, spf, MixStats};
pub use textcore::{analyze, tokenize, LanguageTag, LexiconSet, Token};
