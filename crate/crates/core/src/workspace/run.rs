//! The end-to-end driver: every commit bundle goes through synthesis, then
//! valid checkers through scan, plausibility triage, and (when triage finds
//! noise) refinement, with artifacts written at each stage and a metrics
//! roll-up at the end.

use super::{
    read_json, write_json, Classification, CommitOutcome, RunConfig, WorkspaceError,
    WorkspaceLayout,
};
use crate::category::BugCategory;
use crate::cdsl::CompiledChecker;
use crate::gateway::Gateway;
use crate::patch::{load_commit_bundle, PatchCommit};
use crate::pipeline::{
    categorize_failure, gen_checker, FailureCategory, PipelineContext, PipelineError,
    SynthesisOutcome, SynthesisRecord,
};
use crate::scanner::scan_corpus;
use crate::triage::{
    assess_plausibility, compute_metrics, refine, ConfusionCounts, PlausibilityAssessment,
    RefineRequest, TriageMetrics, Verdict,
};
use crate::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub struct RunArgs<'a> {
    /// Directory of `.mc` sources; scan target and validation ground truth.
    pub corpus_root: &'a Path,
    /// Directory with one commit bundle per subdirectory.
    pub commits_dir: &'a Path,
    /// Where all artifacts land.
    pub workspace_root: &'a Path,
    pub config: &'a RunConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationCounts {
    pub invalid: usize,
    pub direct: usize,
    pub refined: usize,
    pub fail: usize,
}

/// Per-category totals; the metrics table carries one row per known
/// category even when every cell is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: BugCategory,
    pub commits: usize,
    /// Commits whose synthesis produced a valid checker.
    pub valid: usize,
    pub direct: usize,
    pub refined: usize,
    pub failed: usize,
    pub invalid: usize,
}

/// How failed synthesis attempts broke down, across all commits and
/// iterations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureHistogram {
    pub compilation: usize,
    pub runtime: usize,
    pub flags_neither: usize,
    pub flags_both: usize,
}

impl FailureHistogram {
    fn count(&mut self, category: FailureCategory) {
        match category {
            FailureCategory::Compilation => self.compilation += 1,
            FailureCategory::Runtime => self.runtime += 1,
            FailureCategory::FlagsNeither => self.flags_neither += 1,
            FailureCategory::FlagsBoth => self.flags_both += 1,
        }
    }
}

/// The `metrics.json` contents: the whole run in one document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub commits: usize,
    pub classifications: ClassificationCounts,
    pub categories: Vec<CategoryRow>,
    pub failures: FailureHistogram,
    /// Confusion-matrix metrics over every sampled triage verdict. Sampled
    /// reports judged real count as true positives, judged-false ones as
    /// false positives; nothing in a scan can witness a true negative or a
    /// miss, so those stay zero.
    pub triage: TriageMetrics,
    /// The configuration the run actually used, overrides included.
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub outcomes: Vec<CommitOutcome>,
    pub metrics: MetricsReport,
}

/// Loads every bundle under `commits_dir`, sorted by commit id.
pub fn load_commits(commits_dir: &Path) -> Result<Vec<PatchCommit>, WorkspaceError> {
    let mut commits = Vec::new();
    for entry in std::fs::read_dir(commits_dir)? {
        let path = entry?.path();
        if path.is_dir() {
            commits.push(load_commit_bundle(&path)?);
        }
    }
    commits.sort_by(|a, b| a.id.cmp(&b.id));
    if commits.is_empty() {
        return Err(WorkspaceError::EmptyWorkspace {
            path: commits_dir.display().to_string(),
        });
    }
    Ok(commits)
}

pub fn run_all(args: &RunArgs) -> Result<RunSummary, WorkspaceError> {
    let commits = load_commits(args.commits_dir)?;
    let layout = WorkspaceLayout::new(args.workspace_root);
    let mut gateway = args.config.build_gateway()?;

    let mut outcomes = Vec::new();
    for commit in &commits {
        outcomes.push(run_commit(&mut gateway, &layout, args, commit)?);
    }

    let metrics = emit_metrics(&layout, args.config)?;
    write_json(&layout.metrics_json(), &metrics)?;
    Ok(RunSummary { outcomes, metrics })
}

fn run_commit(
    gateway: &mut Gateway,
    layout: &WorkspaceLayout,
    args: &RunArgs,
    commit: &PatchCommit,
) -> Result<CommitOutcome, WorkspaceError> {
    let checkers_dir = layout.checkers_dir();
    let record = {
        let mut ctx = PipelineContext {
            gateway,
            corpus_root: args.corpus_root,
            checkers_dir: &checkers_dir,
            limits: args.config.synthesis_limits(),
            budget: args.config.engine_budget(),
        };
        gen_checker(&mut ctx, commit)?
    };

    let synthesis = record.outcome.as_ref().expect("synthesis always reaches an outcome");
    let outcome = match synthesis {
        SynthesisOutcome::Invalid { .. } => CommitOutcome {
            schema_version: SCHEMA_VERSION,
            commit_id: commit.id.clone(),
            classification: Classification::Invalid,
            category: commit
                .category
                .or_else(|| record.attempts.iter().rev().find_map(|a| a.category)),
            checker_name: None,
            verdict: None,
            report_count: None,
        },
        SynthesisOutcome::Valid { checker_name, checker_source, category, verdict } => {
            let checker = compile_stored(checker_source, &commit.id)?;

            let scan = scan_corpus(args.corpus_root, &checker, &args.config.scan_config())?;
            write_json(&layout.scan_json(checker_name), &scan)?;

            let assessment = assess_plausibility(
                gateway,
                &scan,
                args.corpus_root,
                &args.config.plausibility_thresholds(),
            )?;
            write_json(&layout.triage_json(checker_name), &assessment)?;

            let (classification, report_count) = if assessment.plausible {
                (Classification::Direct, scan.reports.len())
            } else {
                let refinement = refine(
                    gateway,
                    &RefineRequest {
                        source: checker_source,
                        fp_cases: &assessment.fp_cases,
                        commit,
                        corpus_root: args.corpus_root,
                        t_valid: args.config.t_valid,
                        max_iterations: args.config.max_refine_iterations,
                        scan: args.config.refine_scan_config(),
                        budget: args.config.engine_budget(),
                    },
                )?;
                write_json(&layout.refinement_json(checker_name), &refinement)?;
                match &refinement.refined_source {
                    Some(source) => {
                        // The kept checker changed, so the kept scan must
                        // describe it; the refined scan replaces the one
                        // triage judged.
                        let refined = compile_stored(source, &commit.id)?;
                        let rescan = scan_corpus(
                            args.corpus_root,
                            &refined,
                            &args.config.scan_config(),
                        )?;
                        let count = rescan.reports.len();
                        write_json(&layout.scan_json(checker_name), &rescan)?;
                        (Classification::Refined, count)
                    }
                    None => (Classification::Fail, scan.reports.len()),
                }
            };

            gateway
                .drain_transcript_to(&layout.reports_dir(checker_name).join("transcript.jsonl"))?;

            CommitOutcome {
                schema_version: SCHEMA_VERSION,
                commit_id: commit.id.clone(),
                classification,
                category: commit.category.or(*category),
                checker_name: Some(checker_name.clone()),
                verdict: Some(*verdict),
                report_count: Some(report_count),
            }
        }
    };

    write_json(&layout.outcome_json(&commit.id), &outcome)?;
    Ok(outcome)
}

/// Recompiles a checker source that already compiled during synthesis or
/// refinement; failure here means the stored artifact was edited or
/// corrupted.
fn compile_stored(source: &str, commit_id: &str) -> Result<CompiledChecker, WorkspaceError> {
    CompiledChecker::from_source(source).map_err(|diags| {
        WorkspaceError::Pipeline(PipelineError::BadArtifact {
            path: format!("checker for `{commit_id}`"),
            reason: crate::cdsl::render_diagnostics(&diags),
        })
    })
}

/// Rebuilds the metrics roll-up from whatever `outcome.json`, `record.json`,
/// and `triage.json` files the workspace holds, so it works on interrupted
/// runs and hand-assembled workspaces alike. Sampled reports judged real
/// count as true positives and judged-false ones as false positives; a scan
/// cannot witness true negatives or misses, so those stay zero.
pub fn emit_metrics(
    layout: &WorkspaceLayout,
    config: &RunConfig,
) -> Result<MetricsReport, WorkspaceError> {
    let checkers_dir = layout.checkers_dir();
    let mut commit_dirs = Vec::new();
    if checkers_dir.is_dir() {
        for entry in std::fs::read_dir(&checkers_dir)? {
            let path = entry?.path();
            if path.is_dir() {
                commit_dirs.push(path);
            }
        }
    }
    commit_dirs.sort();

    let mut outcomes: Vec<CommitOutcome> = Vec::new();
    let mut failures = FailureHistogram::default();
    let mut confusion = ConfusionCounts::default();
    for dir in commit_dirs {
        let outcome_path = dir.join("outcome.json");
        if !outcome_path.exists() {
            continue;
        }
        let outcome: CommitOutcome = read_json(&outcome_path)?;

        let record_path = dir.join("record.json");
        if record_path.exists() {
            let record: SynthesisRecord = read_json(&record_path)?;
            for attempt in &record.attempts {
                if let Some(failure) = &attempt.failure {
                    failures.count(categorize_failure(failure));
                }
            }
        }

        if let Some(checker) = &outcome.checker_name {
            let triage_path = layout.triage_json(checker);
            if triage_path.exists() {
                let assessment: PlausibilityAssessment = read_json(&triage_path)?;
                for sampled in &assessment.sampled {
                    match sampled.verdict {
                        Verdict::Bug => confusion.true_positives += 1,
                        Verdict::NotABug => confusion.false_positives += 1,
                    }
                }
            }
        }
        outcomes.push(outcome);
    }

    if outcomes.is_empty() {
        return Err(WorkspaceError::EmptyWorkspace {
            path: checkers_dir.display().to_string(),
        });
    }

    let mut classifications = ClassificationCounts::default();
    for outcome in &outcomes {
        match outcome.classification {
            Classification::Invalid => classifications.invalid += 1,
            Classification::Direct => classifications.direct += 1,
            Classification::Refined => classifications.refined += 1,
            Classification::Fail => classifications.fail += 1,
        }
    }

    let categories = BugCategory::ALL
        .iter()
        .map(|&category| {
            let mut row = CategoryRow {
                category,
                commits: 0,
                valid: 0,
                direct: 0,
                refined: 0,
                failed: 0,
                invalid: 0,
            };
            for outcome in outcomes.iter().filter(|o| o.category == Some(category)) {
                row.commits += 1;
                match outcome.classification {
                    Classification::Invalid => row.invalid += 1,
                    Classification::Direct => {
                        row.valid += 1;
                        row.direct += 1;
                    }
                    Classification::Refined => {
                        row.valid += 1;
                        row.refined += 1;
                    }
                    Classification::Fail => {
                        row.valid += 1;
                        row.failed += 1;
                    }
                }
            }
            row
        })
        .collect();

    Ok(MetricsReport {
        schema_version: SCHEMA_VERSION,
        commits: outcomes.len(),
        classifications,
        categories,
        failures,
        triage: compute_metrics(&confusion),
        config: config.clone(),
    })
}
