//! The synthesis loop for one commit.

use super::{
    categorize_failure, validate_checker, AttemptFailure, AttemptRecord, DualRunOutcome,
    FailureCategory, PipelineError, SynthesisOutcome, SynthesisRecord,
};
use crate::cdsl::{render_diagnostics, CompiledChecker};
use crate::engine::{EngineBudget, EventHooks as _};
use crate::gateway::{parse_front_matter, Gateway, Role, RoleInputs};
use crate::patch::{render_diff, PatchCommit};
use crate::SCHEMA_VERSION;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug)]
pub struct SynthesisLimits {
    /// Full pattern→plan→implement→validate rounds per commit.
    pub max_iterations: u32,
    /// Repair consultations per round before the attempt counts as a
    /// compilation failure.
    pub max_repair_attempts: u32,
    /// Patched-side report cap: a checker this noisy on fixed code is
    /// useless even if the buggy side is noisier.
    pub t_valid: usize,
}

impl Default for SynthesisLimits {
    fn default() -> Self {
        SynthesisLimits { max_iterations: 10, max_repair_attempts: 5, t_valid: 50 }
    }
}

pub struct PipelineContext<'a> {
    pub gateway: &'a mut Gateway,
    pub corpus_root: &'a Path,
    /// Directory that holds one subdirectory per commit.
    pub checkers_dir: &'a Path,
    pub limits: SynthesisLimits,
    pub budget: EngineBudget,
}

impl PipelineContext<'_> {
    fn commit_dir(&self, commit: &PatchCommit) -> PathBuf {
        self.checkers_dir.join(&commit.id)
    }
}

/// Runs synthesis for one commit, leaving artifacts under
/// `<checkers_dir>/<commit_id>/`:
///
/// ```text
/// attempt-<n>/pattern.md       what the analyst saw in the patch
/// attempt-<n>/plan.md          the detection plan
/// attempt-<n>/checker.cdsl     final source of that attempt
/// attempt-<n>/diagnostics.txt  compiler output per repair round
/// attempt-<n>/verdict.json     the attempt record
/// checker.cdsl                 the valid checker, once one emerges
/// record.json                  all attempts plus the outcome so far
/// transcript.jsonl             every gateway exchange
/// ```
///
/// If `record.json` already holds an outcome the commit is skipped; if it
/// holds earlier attempts without an outcome, numbering continues after
/// them, so an interrupted run resumes where it stopped.
pub fn gen_checker(
    ctx: &mut PipelineContext,
    commit: &PatchCommit,
) -> Result<SynthesisRecord, PipelineError> {
    let commit_dir = ctx.commit_dir(commit);
    std::fs::create_dir_all(&commit_dir)?;
    let record_path = commit_dir.join("record.json");

    let mut record = load_record(&record_path, &commit.id)?;
    if record.outcome.is_some() {
        return Ok(record);
    }

    let already_done = record.attempts.len() as u32;
    let patch_text = render_diff(&commit.diffs);

    for index in already_done + 1..=ctx.limits.max_iterations {
        let attempt = run_attempt(ctx, commit, &patch_text, index, &commit_dir)?;
        let success = attempt.record.failure.is_none();
        record.attempts.push(attempt.record.clone());
        if success {
            let checker = attempt.checker.expect("successful attempts carry a checker");
            record.outcome = Some(SynthesisOutcome::Valid {
                checker_name: checker.checker_name().to_string(),
                checker_source: attempt.source,
                category: attempt.record.category,
                verdict: attempt.record.verdict.expect("successful attempts carry a verdict"),
            });
        } else if index == ctx.limits.max_iterations {
            let failure = attempt.record.failure.as_ref().expect("failed attempts say why");
            record.outcome =
                Some(SynthesisOutcome::Invalid { failure: categorize_failure(failure) });
        }
        save_record(&record_path, &record)?;
        if record.outcome.is_some() {
            break;
        }
    }

    if record.outcome.is_none() {
        // Only reachable when a stale record already held max_iterations
        // attempts but no outcome (say, a crash between writes).
        let failure = record
            .attempts
            .last()
            .and_then(|a| a.failure.as_ref())
            .map(categorize_failure)
            .unwrap_or(FailureCategory::Compilation);
        record.outcome = Some(SynthesisOutcome::Invalid { failure });
        save_record(&record_path, &record)?;
    }

    if let Some(SynthesisOutcome::Valid { checker_source, .. }) = &record.outcome {
        std::fs::write(commit_dir.join("checker.cdsl"), checker_source)?;
    }
    ctx.gateway.drain_transcript_to(&commit_dir.join("transcript.jsonl"))?;
    Ok(record)
}

struct AttemptResult {
    record: AttemptRecord,
    source: String,
    checker: Option<CompiledChecker>,
}

fn run_attempt(
    ctx: &mut PipelineContext,
    commit: &PatchCommit,
    patch_text: &str,
    index: u32,
    commit_dir: &Path,
) -> Result<AttemptResult, PipelineError> {
    let attempt_dir = commit_dir.join(format!("attempt-{index}"));
    std::fs::create_dir_all(&attempt_dir)?;

    let mut inputs = RoleInputs::new();
    inputs.insert("commit_message".to_string(), commit.message.clone());
    inputs.insert("patch".to_string(), patch_text.to_string());
    let pattern = ctx.gateway.ask(Role::PatternAnalyst, inputs)?;
    std::fs::write(attempt_dir.join("pattern.md"), &pattern)?;

    let front = parse_front_matter(&pattern);
    let category = front.get("category").and_then(|c| c.parse().ok());
    let target = front.get("target").filter(|t| *t != "none").cloned();

    let mut record = AttemptRecord {
        index,
        category,
        target,
        repair_rounds: 0,
        compiled: false,
        verdict: None,
        failure: None,
    };

    if category.is_none() {
        let diagnostics =
            "pattern analysis produced no supported bug category; nothing to implement\n";
        std::fs::write(attempt_dir.join("diagnostics.txt"), diagnostics)?;
        record.failure =
            Some(AttemptFailure::Compilation { diagnostics: diagnostics.to_string() });
        write_attempt(&attempt_dir, &record)?;
        return Ok(AttemptResult { record, source: String::new(), checker: None });
    }

    let mut inputs = RoleInputs::new();
    inputs.insert("pattern".to_string(), pattern);
    let plan = ctx.gateway.ask(Role::Planner, inputs)?;
    std::fs::write(attempt_dir.join("plan.md"), &plan)?;

    let mut inputs = RoleInputs::new();
    inputs.insert("plan".to_string(), plan);
    let mut source = ctx.gateway.ask(Role::Implementer, inputs)?;

    let mut diagnostics_log = String::new();
    let mut checker = None;
    for round in 0..=ctx.limits.max_repair_attempts {
        match CompiledChecker::from_source(&source) {
            Ok(compiled) => {
                checker = Some(compiled);
                break;
            }
            Err(diags) => {
                let rendered = render_diagnostics(&diags);
                let _ = writeln!(diagnostics_log, "# round {round}\n{rendered}");
                if round == ctx.limits.max_repair_attempts {
                    break;
                }
                let mut inputs = RoleInputs::new();
                inputs.insert("checker".to_string(), source.clone());
                inputs.insert("diagnostics".to_string(), rendered);
                source = ctx.gateway.ask(Role::SyntaxRepairer, inputs)?;
                record.repair_rounds = round + 1;
            }
        }
    }

    std::fs::write(attempt_dir.join("checker.cdsl"), &source)?;
    std::fs::write(attempt_dir.join("diagnostics.txt"), &diagnostics_log)?;

    let Some(checker) = checker else {
        record.failure = Some(AttemptFailure::Compilation { diagnostics: diagnostics_log });
        write_attempt(&attempt_dir, &record)?;
        return Ok(AttemptResult { record, source, checker: None });
    };
    record.compiled = true;

    match validate_checker(&checker, commit, ctx.corpus_root, ctx.limits.t_valid, &ctx.budget)? {
        DualRunOutcome::Runtime(err) => {
            record.failure = Some(AttemptFailure::runtime(&err));
        }
        DualRunOutcome::Verdict(verdict) => {
            record.verdict = Some(verdict);
            if !verdict.valid {
                record.failure = Some(AttemptFailure::Semantic { verdict });
            }
        }
    }
    write_attempt(&attempt_dir, &record)?;
    Ok(AttemptResult { record, source, checker: Some(checker) })
}

fn write_attempt(attempt_dir: &Path, record: &AttemptRecord) -> Result<(), PipelineError> {
    let json = serde_json::to_string_pretty(record).expect("attempt records serialize");
    std::fs::write(attempt_dir.join("verdict.json"), json)?;
    Ok(())
}

fn load_record(path: &Path, commit_id: &str) -> Result<SynthesisRecord, PipelineError> {
    if !path.exists() {
        return Ok(SynthesisRecord {
            schema_version: SCHEMA_VERSION,
            commit_id: commit_id.to_string(),
            attempts: Vec::new(),
            outcome: None,
        });
    }
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| PipelineError::BadArtifact {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn save_record(path: &Path, record: &SynthesisRecord) -> Result<(), PipelineError> {
    let json = serde_json::to_string_pretty(record).expect("synthesis records serialize");
    std::fs::write(path, json)?;
    Ok(())
}
