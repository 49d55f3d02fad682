//! Run orchestration: configuration, the on-disk workspace layout, and the
//! end-to-end driver that takes every commit bundle through synthesis,
//! scanning, triage, refinement, and metrics.
//!
//! A full run leaves this tree behind:
//!
//! ```text
//! <workspace>/
//!   commits/<id>/                       input commit bundles (by convention)
//!   corpus/                             input sources (by convention)
//!   cassettes/                          recorded gateway exchanges
//!   checkers/<commit>/attempt-<n>/...   synthesis artifacts per attempt
//!   checkers/<commit>/checker.cdsl      the valid checker, when one emerged
//!   checkers/<commit>/record.json       attempts + synthesis outcome
//!   checkers/<commit>/outcome.json      final classification for the commit
//!   checkers/<commit>/transcript.jsonl  synthesis-stage gateway exchanges
//!   reports/<checker>/scan.json         scan of the checker that was kept
//!   reports/<checker>/triage.json       plausibility assessment
//!   reports/<checker>/refinement.json   refinement rounds, when attempted
//!   reports/<checker>/transcript.jsonl  triage/refinement exchanges
//!   metrics/metrics.json                the whole run, aggregated
//! ```
//!
//! The `commits/`, `corpus/`, and `cassettes/` directories are conventions
//! the command line defaults to; the library takes explicit paths.

mod config;
mod run;

pub use config::{ProviderKind, RunConfig};
pub use run::{
    emit_metrics, load_commits, run_all, CategoryRow, ClassificationCounts, FailureHistogram,
    MetricsReport, RunArgs, RunSummary,
};

use crate::category::BugCategory;
use crate::pipeline::ValidationVerdict;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Where everything lives under one workspace root.
#[derive(Clone, Debug)]
pub struct WorkspaceLayout {
    pub root: PathBuf,
}

impl WorkspaceLayout {
    pub fn new(root: impl Into<PathBuf>) -> WorkspaceLayout {
        WorkspaceLayout { root: root.into() }
    }

    pub fn commits_dir(&self) -> PathBuf {
        self.root.join("commits")
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.root.join("corpus")
    }

    pub fn cassettes_dir(&self) -> PathBuf {
        self.root.join("cassettes")
    }

    pub fn checkers_dir(&self) -> PathBuf {
        self.root.join("checkers")
    }

    pub fn commit_dir(&self, commit_id: &str) -> PathBuf {
        self.checkers_dir().join(commit_id)
    }

    pub fn outcome_json(&self, commit_id: &str) -> PathBuf {
        self.commit_dir(commit_id).join("outcome.json")
    }

    pub fn reports_dir(&self, checker: &str) -> PathBuf {
        self.root.join("reports").join(checker)
    }

    pub fn scan_json(&self, checker: &str) -> PathBuf {
        self.reports_dir(checker).join("scan.json")
    }

    pub fn triage_json(&self, checker: &str) -> PathBuf {
        self.reports_dir(checker).join("triage.json")
    }

    pub fn refinement_json(&self, checker: &str) -> PathBuf {
        self.reports_dir(checker).join("refinement.json")
    }

    pub fn metrics_json(&self) -> PathBuf {
        self.root.join("metrics").join("metrics.json")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("cannot load config `{path}`: {reason}")]
    Config { path: String, reason: String },
    #[error("environment override {var} is unusable: {reason}")]
    BadOverride { var: String, reason: String },
    #[error("empty workspace: nothing under `{path}`")]
    EmptyWorkspace { path: String },
    #[error(transparent)]
    Gateway(#[from] crate::gateway::GatewayError),
    #[error(transparent)]
    Pipeline(#[from] crate::pipeline::PipelineError),
    #[error(transparent)]
    Triage(#[from] crate::triage::TriageError),
    #[error(transparent)]
    Scan(#[from] crate::scanner::ScanError),
    #[error(transparent)]
    Patch(#[from] crate::patch::PatchError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a commit ended up after the full pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// Synthesis never produced a valid checker.
    Invalid,
    /// The valid checker was plausible as scanned.
    Direct,
    /// Plausible only after refinement.
    Refined,
    /// Valid but implausible, and refinement could not fix it.
    Fail,
}

impl Classification {
    pub const ALL: [Classification; 4] = [
        Classification::Invalid,
        Classification::Direct,
        Classification::Refined,
        Classification::Fail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Invalid => "invalid",
            Classification::Direct => "direct",
            Classification::Refined => "refined",
            Classification::Fail => "fail",
        }
    }
}

/// The `outcome.json` written per commit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommitOutcome {
    pub schema_version: u32,
    pub commit_id: String,
    pub classification: Classification,
    pub category: Option<BugCategory>,
    pub checker_name: Option<String>,
    pub verdict: Option<ValidationVerdict>,
    /// Reports from the scan of the checker that was kept.
    pub report_count: Option<usize>,
}

/// Writes a pretty-printed JSON artifact, creating parent directories.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), WorkspaceError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a JSON artifact back, reporting malformed content as a bad
/// artifact rather than a bare parse error.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, WorkspaceError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        WorkspaceError::Pipeline(crate::pipeline::PipelineError::BadArtifact {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_layout_places_every_artifact_under_the_root() {
        let layout = WorkspaceLayout::new("/ws");
        assert_eq!(layout.commit_dir("npd-001"), PathBuf::from("/ws/checkers/npd-001"));
        assert_eq!(
            layout.outcome_json("npd-001"),
            PathBuf::from("/ws/checkers/npd-001/outcome.json")
        );
        assert_eq!(
            layout.scan_json("Npd_get_buf"),
            PathBuf::from("/ws/reports/Npd_get_buf/scan.json")
        );
        assert_eq!(layout.metrics_json(), PathBuf::from("/ws/metrics/metrics.json"));
    }

    #[test]
    fn test_classification_labels_are_stable() {
        let labels: Vec<&str> = Classification::ALL.iter().map(|c| c.as_str()).collect();
        assert_eq!(labels, ["invalid", "direct", "refined", "fail"]);
        assert_eq!(
            serde_json::to_string(&Classification::Refined).unwrap(),
            "\"refined\""
        );
    }
}
