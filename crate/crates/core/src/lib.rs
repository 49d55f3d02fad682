//! Core library for the checker synthesis pipeline.
//!
//! The pipeline turns a bug-fix patch into a working static-analysis checker:
//! agents study the patch, describe the bug pattern, plan state transitions,
//! and emit a checker in a small declarative DSL. Candidate checkers are
//! repaired, validated against the pre/post-patch code, scanned over a corpus,
//! triaged, and refined against identified false positives.
//!
//! Everything runs against a hermetic backend: programs are written in
//! MiniLang (see [`minilang`]) and analyzed by a path-sensitive symbolic
//! engine (see [`engine`]). Agent calls go through a gateway with pluggable
//! providers so complete runs can be recorded and replayed deterministically.

pub mod category;
pub mod cdsl;
pub mod engine;
pub mod gateway;
pub mod minilang;
pub mod patch;
pub mod pipeline;
pub mod scanner;
pub mod span;
pub mod triage;
pub mod workspace;

pub use category::BugCategory;
pub use span::SourceSpan;

/// Version stamped into every JSON artifact the pipeline writes.
pub const SCHEMA_VERSION: u32 = 1;
