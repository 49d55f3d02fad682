//! Checker synthesis and validation.
//!
//! [`gen_checker`] drives the loop for one commit: pattern analysis, plan,
//! implementation, bounded syntax repair, then dual-version validation. A
//! candidate is *valid* when it flags the buggy (pre-patch) code more than
//! the patched code and stays under the patched-side noise cap. Failed
//! attempts are categorized and retried up to the iteration limit; every
//! attempt leaves artifacts on disk and the loop resumes mid-commit from
//! `record.json` after an interruption.

mod synthesize;
mod validate;

pub use synthesize::{gen_checker, PipelineContext, SynthesisLimits};
pub use validate::{validate_checker, DualRunOutcome};

use crate::category::BugCategory;
use crate::engine::CheckerRuntimeError;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Gateway(#[from] crate::gateway::GatewayError),
    #[error(transparent)]
    Patch(#[from] crate::patch::PatchError),
    #[error("corpus file `{path}` is missing")]
    MissingCorpusFile { path: String },
    #[error("corpus file `{path}` does not parse: {reason}")]
    UnparseableCorpusFile { path: String, reason: String },
    #[error("artifact `{path}` is unreadable: {reason}")]
    BadArtifact { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Why an attempt failed, for aggregation across runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCategory {
    /// The source never compiled, or no usable source was produced at all.
    Compilation,
    /// The checker compiled but aborted the engine at analysis time.
    Runtime,
    /// Compiled and ran, but flagged nothing on the buggy version.
    FlagsNeither,
    /// Compiled and ran, but flagged the patched version as much as the
    /// buggy one (or past the noise cap).
    FlagsBoth,
}

/// Report counts from running a candidate over both sides of the patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub n_buggy: usize,
    pub n_patched: usize,
    pub t_valid: usize,
    pub valid: bool,
}

impl ValidationVerdict {
    pub fn new(n_buggy: usize, n_patched: usize, t_valid: usize) -> ValidationVerdict {
        ValidationVerdict {
            n_buggy,
            n_patched,
            t_valid,
            valid: n_buggy > n_patched && n_patched < t_valid,
        }
    }
}

/// What sank one attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttemptFailure {
    Compilation { diagnostics: String },
    Runtime { handler: String, reason: String },
    Semantic { verdict: ValidationVerdict },
}

impl AttemptFailure {
    pub fn runtime(err: &CheckerRuntimeError) -> AttemptFailure {
        AttemptFailure::Runtime { handler: err.handler.clone(), reason: err.reason.clone() }
    }
}

pub fn categorize_failure(failure: &AttemptFailure) -> FailureCategory {
    match failure {
        AttemptFailure::Compilation { .. } => FailureCategory::Compilation,
        AttemptFailure::Runtime { .. } => FailureCategory::Runtime,
        AttemptFailure::Semantic { verdict } => {
            if verdict.n_buggy == 0 {
                FailureCategory::FlagsNeither
            } else {
                FailureCategory::FlagsBoth
            }
        }
    }
}

/// One iteration of the synthesis loop, as persisted per attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub index: u32,
    pub category: Option<BugCategory>,
    pub target: Option<String>,
    pub repair_rounds: u32,
    pub compiled: bool,
    pub verdict: Option<ValidationVerdict>,
    pub failure: Option<AttemptFailure>,
}

/// Terminal state of synthesis for one commit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SynthesisOutcome {
    Valid {
        checker_name: String,
        checker_source: String,
        category: Option<BugCategory>,
        verdict: ValidationVerdict,
    },
    Invalid {
        failure: FailureCategory,
    },
}

/// Everything synthesis knows about one commit; the `record.json` contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    pub schema_version: u32,
    pub commit_id: String,
    pub attempts: Vec<AttemptRecord>,
    pub outcome: Option<SynthesisOutcome>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_verdict_requires_separation_and_quiet_patched_side() {
        assert!(ValidationVerdict::new(3, 0, 50).valid);
        assert!(ValidationVerdict::new(1, 0, 50).valid);
        assert!(!ValidationVerdict::new(0, 0, 50).valid);
        assert!(!ValidationVerdict::new(2, 2, 50).valid);
        assert!(!ValidationVerdict::new(2, 3, 50).valid);
        assert!(!ValidationVerdict::new(60, 55, 50).valid);
        assert!(ValidationVerdict::new(60, 49, 50).valid);
    }

    #[test]
    fn test_semantic_failures_split_on_buggy_side_silence() {
        let neither = AttemptFailure::Semantic { verdict: ValidationVerdict::new(0, 0, 50) };
        assert_eq!(categorize_failure(&neither), FailureCategory::FlagsNeither);
        let both = AttemptFailure::Semantic { verdict: ValidationVerdict::new(4, 4, 50) };
        assert_eq!(categorize_failure(&both), FailureCategory::FlagsBoth);
        let noisy = AttemptFailure::Semantic { verdict: ValidationVerdict::new(60, 55, 50) };
        assert_eq!(categorize_failure(&noisy), FailureCategory::FlagsBoth);
    }
}
