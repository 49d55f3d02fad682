//! Patch ingestion: unified diffs, patch application, and extraction of the
//! functions a commit touches.
//!
//! A commit arrives as a directory bundle:
//!
//! ```text
//! <commit-id>/
//!   message.txt    commit message
//!   patch.diff     unified diff against the corpus
//!   meta.toml      optional; carries a bug category tag
//! ```
//!
//! The corpus stores files in their *patched* state, so the buggy version of
//! a file is recovered by applying the commit's diff in reverse. Diffs must
//! be plain unified diffs: one `diff --git`/`---`/`+++` header group per
//! file, `@@` hunks with matching line counts, and no rename, delete, or
//! binary operations.

mod apply;
mod bundle;
mod extract;
mod parser;
mod render;

pub use apply::{apply_patch, invert_diff, Direction};
pub use bundle::load_commit_bundle;
pub use extract::extract_function_contexts;
pub use parser::parse_patch;
pub use render::render_diff;

use crate::category::BugCategory;
use serde::{Deserialize, Serialize};

/// A bug-fix commit: its message, its diffs, and an optional category tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchCommit {
    pub id: String,
    pub message: String,
    pub diffs: Vec<FileDiff>,
    pub category: Option<BugCategory>,
}

impl PatchCommit {
    /// The message and diff body as one text, the way prompts embed it.
    pub fn combined_text(&self) -> String {
        let mut out = self.message.clone();
        if !out.ends_with('\n') && !out.is_empty() {
            out.push('\n');
        }
        out.push('\n');
        out.push_str(&render_diff(&self.diffs));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDiff {
    /// Path relative to the corpus root (the `a/`, `b/` prefixes stripped).
    pub path: String,
    pub hunks: Vec<Hunk>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: u32,
    pub old_len: u32,
    pub new_start: u32,
    pub new_len: u32,
    /// Trailing text after the closing `@@`, preserved for round trips.
    pub section: String,
    pub lines: Vec<HunkLine>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HunkLine {
    Context(String),
    Removed(String),
    Added(String),
}

/// One function a commit modified, in both its versions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionContext {
    pub path: String,
    pub name: String,
    pub pre_source: String,
    pub post_source: String,
}

#[derive(Debug, thiserror::Error)]
pub enum PatchError {
    #[error("malformed diff at line {line}: {reason}")]
    MalformedDiff { line: usize, reason: String },
    #[error("hunk {hunk_index} does not match `{path}`")]
    ContextMismatch { path: String, hunk_index: usize },
    #[error("`{path}` is not in the corpus")]
    MissingFile { path: String },
    #[error("`{path}` does not parse: {source}")]
    UnparseableFile {
        path: String,
        #[source]
        source: crate::minilang::ParseError,
    },
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
