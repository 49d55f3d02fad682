//! Dual-version validation: run a candidate over every function of every
//! file the commit touches, in both the buggy (pre-patch) and patched state,
//! and compare report counts.

use super::{PipelineError, ValidationVerdict};
use crate::cdsl::CompiledChecker;
use crate::engine::{analyze_function, CheckerRuntimeError, EngineBudget};
use crate::minilang::parse_module;
use crate::patch::{apply_patch, Direction, PatchCommit};
use std::path::Path;

/// Validation either produces counts or dies inside the checker's own hooks;
/// the latter is a categorizable attempt failure, not a pipeline error.
#[derive(Clone, Debug, PartialEq)]
pub enum DualRunOutcome {
    Verdict(ValidationVerdict),
    Runtime(CheckerRuntimeError),
}

/// The corpus holds files in their patched state, so the buggy text is the
/// patched text with the commit's diff applied in reverse.
pub fn validate_checker(
    checker: &CompiledChecker,
    commit: &PatchCommit,
    corpus_root: &Path,
    t_valid: usize,
    budget: &EngineBudget,
) -> Result<DualRunOutcome, PipelineError> {
    let mut n_buggy = 0;
    let mut n_patched = 0;
    for diff in &commit.diffs {
        let disk_path = corpus_root.join(&diff.path);
        let patched = std::fs::read_to_string(&disk_path)
            .map_err(|_| PipelineError::MissingCorpusFile { path: diff.path.clone() })?;
        let buggy = apply_patch(&patched, diff, Direction::Reverse)?;

        match count_reports(checker, &buggy, &diff.path, budget)? {
            Ok(count) => n_buggy += count,
            Err(err) => return Ok(DualRunOutcome::Runtime(err)),
        }
        match count_reports(checker, &patched, &diff.path, budget)? {
            Ok(count) => n_patched += count,
            Err(err) => return Ok(DualRunOutcome::Runtime(err)),
        }
    }
    Ok(DualRunOutcome::Verdict(ValidationVerdict::new(n_buggy, n_patched, t_valid)))
}

fn count_reports(
    checker: &CompiledChecker,
    source: &str,
    path: &str,
    budget: &EngineBudget,
) -> Result<Result<usize, CheckerRuntimeError>, PipelineError> {
    let module = parse_module(source).map_err(|e| PipelineError::UnparseableCorpusFile {
        path: path.to_string(),
        reason: e.to_string(),
    })?;
    let mut total = 0;
    for function in &module.functions {
        match analyze_function(function, path, checker, budget) {
            Ok(analysis) => total += analysis.reports.len(),
            Err(err) => return Ok(Err(err)),
        }
    }
    Ok(Ok(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdsl::exemplars::exemplars;
    use crate::patch::parse_patch;

    const PATCHED_WIDGET: &str = r#"int widget_init(int n) {
    int* p = get_buf(n);
    if (!p) {
        return -12;
    }
    *p = n;
    return 0;
}
"#;

    const WIDGET_DIFF: &str = r#"--- a/lib/widget.mc
+++ b/lib/widget.mc
@@ -1,5 +1,8 @@
 int widget_init(int n) {
     int* p = get_buf(n);
+    if (!p) {
+        return -12;
+    }
     *p = n;
     return 0;
 }
"#;

    fn npd_checker(target: &str) -> CompiledChecker {
        let source = exemplars()[0].checker.replace("devm_kzalloc", target);
        CompiledChecker::from_source(&source).unwrap()
    }

    fn widget_commit(dir: &Path) -> PatchCommit {
        std::fs::create_dir_all(dir.join("lib")).unwrap();
        std::fs::write(dir.join("lib/widget.mc"), PATCHED_WIDGET).unwrap();
        let (_, diffs) = parse_patch(WIDGET_DIFF).unwrap();
        PatchCommit {
            id: "widget-1".to_string(),
            message: "check get_buf result".to_string(),
            diffs,
            category: None,
        }
    }

    #[test]
    fn test_right_checker_separates_buggy_from_patched() {
        let dir = tempfile::tempdir().unwrap();
        let commit = widget_commit(dir.path());
        let outcome = validate_checker(
            &npd_checker("get_buf"),
            &commit,
            dir.path(),
            50,
            &EngineBudget::default(),
        )
        .unwrap();
        match outcome {
            DualRunOutcome::Verdict(v) => {
                assert_eq!((v.n_buggy, v.n_patched), (1, 0));
                assert!(v.valid);
            }
            other => panic!("expected verdict, got {other:?}"),
        }
    }

    #[test]
    fn test_checker_for_unrelated_callee_flags_neither() {
        let dir = tempfile::tempdir().unwrap();
        let commit = widget_commit(dir.path());
        let outcome = validate_checker(
            &npd_checker("some_other_alloc"),
            &commit,
            dir.path(),
            50,
            &EngineBudget::default(),
        )
        .unwrap();
        match outcome {
            DualRunOutcome::Verdict(v) => {
                assert_eq!((v.n_buggy, v.n_patched), (0, 0));
                assert!(!v.valid);
            }
            other => panic!("expected verdict, got {other:?}"),
        }
    }

    #[test]
    fn test_hook_crash_surfaces_as_runtime_outcome() {
        let dir = tempfile::tempdir().unwrap();
        let commit = widget_commit(dir.path());
        let crashing = CompiledChecker::from_source(
            r#"checker Crash {
    map M { A }
    template t = "msg";
    on post_call where callee_is("get_buf") {
        report(t, arg_region(7));
    }
}
"#,
        )
        .unwrap();
        let outcome =
            validate_checker(&crashing, &commit, dir.path(), 50, &EngineBudget::default()).unwrap();
        match outcome {
            DualRunOutcome::Runtime(err) => assert_eq!(err.handler, "post_call"),
            other => panic!("expected runtime outcome, got {other:?}"),
        }
    }

    #[test]
    fn test_missing_corpus_file_is_a_pipeline_error() {
        let dir = tempfile::tempdir().unwrap();
        let (_, diffs) = parse_patch(WIDGET_DIFF).unwrap();
        let commit = PatchCommit {
            id: "widget-1".to_string(),
            message: String::new(),
            diffs,
            category: None,
        };
        let err = validate_checker(
            &npd_checker("get_buf"),
            &commit,
            dir.path(),
            50,
            &EngineBudget::default(),
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::MissingCorpusFile { .. }));
    }
}
