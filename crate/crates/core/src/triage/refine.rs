//! Refinement: rework a checker against the false positives triage found,
//! without losing what made it valid in the first place.
//!
//! Each round asks the refiner for a new source, then holds it to two
//! criteria at once: the prior false-positive sites must go quiet, and the
//! checker must still separate the original commit's buggy code from its
//! patched code. Rounds repeat up to the limit; the first source to meet
//! both wins.

use super::{Distillation, TriageError};
use crate::cdsl::CompiledChecker;
use crate::engine::EngineBudget;
use crate::gateway::{Gateway, Role, RoleInputs};
use crate::patch::PatchCommit;
use crate::pipeline::{validate_checker, DualRunOutcome};
use crate::scanner::{scan_corpus, ScanConfig};
use crate::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub struct RefineRequest<'a> {
    pub source: &'a str,
    pub fp_cases: &'a [Distillation],
    pub commit: &'a PatchCommit,
    pub corpus_root: &'a Path,
    pub t_valid: usize,
    pub max_iterations: u32,
    /// Scan settings for the false-positive re-check; refinement scans run
    /// under a wall-clock limit and a warning cap so a degenerate refined
    /// checker cannot stall the pipeline.
    pub scan: ScanConfig,
    pub budget: EngineBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementIteration {
    pub index: u32,
    pub compiled: bool,
    /// Reports the refined checker still produces at prior FP sites; `None`
    /// until the source compiles.
    pub reports_at_fp_sites: Option<usize>,
    /// Whether the refined checker still validates on the original commit.
    pub still_valid: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementOutcome {
    pub schema_version: u32,
    pub checker: String,
    pub iterations: Vec<RefinementIteration>,
    pub succeeded: bool,
    /// The winning source, when refinement succeeded.
    pub refined_source: Option<String>,
}

pub fn refine(gateway: &mut Gateway, request: &RefineRequest) -> Result<RefinementOutcome, TriageError> {
    if request.fp_cases.is_empty() {
        return Err(TriageError::PreconditionViolated);
    }
    let checker_name = request
        .fp_cases
        .first()
        .map(|c| c.checker.clone())
        .unwrap_or_default();

    let fp_text = request
        .fp_cases
        .iter()
        .map(|c| c.text.as_str())
        .collect::<Vec<_>>()
        .join("\n---\n");

    let mut outcome = RefinementOutcome {
        schema_version: SCHEMA_VERSION,
        checker: checker_name,
        iterations: Vec::new(),
        succeeded: false,
        refined_source: None,
    };

    let mut current = request.source.to_string();
    for index in 1..=request.max_iterations {
        let mut inputs = RoleInputs::new();
        inputs.insert("checker".to_string(), current.clone());
        inputs.insert("fp_cases".to_string(), fp_text.clone());
        let candidate = gateway.ask(Role::Refiner, inputs)?;

        let mut iteration = RefinementIteration {
            index,
            compiled: false,
            reports_at_fp_sites: None,
            still_valid: None,
        };

        let compiled = CompiledChecker::from_source(&candidate);
        if let Ok(checker) = compiled {
            iteration.compiled = true;

            let scan = scan_corpus(request.corpus_root, &checker, &request.scan)?;
            let at_fp_sites = scan
                .reports
                .iter()
                .filter(|r| {
                    request
                        .fp_cases
                        .iter()
                        .any(|fp| fp.file == r.file && fp.line == r.span.line)
                })
                .count();
            iteration.reports_at_fp_sites = Some(at_fp_sites);

            let still_valid = match validate_checker(
                &checker,
                request.commit,
                request.corpus_root,
                request.t_valid,
                &request.budget,
            )
            .map_err(Box::new)?
            {
                DualRunOutcome::Verdict(v) => v.valid,
                DualRunOutcome::Runtime(_) => false,
            };
            iteration.still_valid = Some(still_valid);

            if at_fp_sites == 0 && still_valid {
                outcome.iterations.push(iteration);
                outcome.succeeded = true;
                outcome.refined_source = Some(candidate);
                return Ok(outcome);
            }
        }
        outcome.iterations.push(iteration);
        current = candidate;
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdsl::exemplars::exemplars;
    use crate::gateway::{RefinerMode, ScriptedProvider};
    use crate::patch::parse_patch;
    use crate::scanner::ScanOutcome;
    use crate::triage::{distill, PlausibilityThresholds};

    const COMMIT_DIFF: &str = r#"--- a/lib/fixed.mc
+++ b/lib/fixed.mc
@@ -1,5 +1,8 @@
 int fixed_init(int n) {
     int* p = get_buf(n);
+    if (!p) {
+        return -12;
+    }
     *p = n;
     return 0;
 }
"#;

    fn corpus(dir: &Path) {
        std::fs::create_dir_all(dir.join("lib")).unwrap();
        std::fs::write(
            dir.join("lib/fixed.mc"),
            "int fixed_init(int n) {\n    int* p = get_buf(n);\n    if (!p) {\n        return -12;\n    }\n    *p = n;\n    return 0;\n}\n",
        )
        .unwrap();
        std::fs::write(
            dir.join("lib/vetted.mc"),
            "int vetted(int n) {\n    int* p = get_buf(n);\n    validate_buf(p);\n    *p = n;\n    return 0;\n}\n",
        )
        .unwrap();
        std::fs::write(
            dir.join("lib/honest.mc"),
            "int honest(int n) {\n    int* p = get_buf(n);\n    *p = n;\n    return 0;\n}\n",
        )
        .unwrap();
    }

    fn setup(dir: &Path) -> (String, PatchCommit, ScanOutcome) {
        corpus(dir);
        let source = exemplars()[0].checker.replace("devm_kzalloc", "get_buf");
        let (_, diffs) = parse_patch(COMMIT_DIFF).unwrap();
        let commit = PatchCommit {
            id: "npd-fixed".to_string(),
            message: "check get_buf result".to_string(),
            diffs,
            category: None,
        };
        let checker = CompiledChecker::from_source(&source).unwrap();
        let scan = scan_corpus(dir, &checker, &ScanConfig::default()).unwrap();
        (source, commit, scan)
    }

    fn fp_cases(scan: &ScanOutcome, dir: &Path) -> Vec<Distillation> {
        scan.reports
            .iter()
            .enumerate()
            .filter(|(_, r)| r.file == "lib/vetted.mc")
            .map(|(i, r)| distill(r, dir, i).unwrap())
            .collect()
    }

    fn request<'a>(
        source: &'a str,
        cases: &'a [Distillation],
        commit: &'a PatchCommit,
        dir: &'a Path,
    ) -> RefineRequest<'a> {
        RefineRequest {
            source,
            fp_cases: cases,
            commit,
            corpus_root: dir,
            t_valid: 50,
            max_iterations: 3,
            scan: ScanConfig::default(),
            budget: EngineBudget::default(),
        }
    }

    #[test]
    fn test_guard_refinement_silences_fp_and_stays_valid() {
        let dir = tempfile::tempdir().unwrap();
        let (source, commit, scan) = setup(dir.path());
        let cases = fp_cases(&scan, dir.path());
        assert_eq!(cases.len(), 1);
        let mut gw = Gateway::new(Box::new(ScriptedProvider::new()));
        let outcome =
            refine(&mut gw, &request(&source, &cases, &commit, dir.path())).unwrap();
        assert!(outcome.succeeded);
        assert_eq!(outcome.iterations.len(), 1);
        assert_eq!(outcome.iterations[0].reports_at_fp_sites, Some(0));
        assert_eq!(outcome.iterations[0].still_valid, Some(true));

        // The refined checker still flags the unvetted use.
        let refined =
            CompiledChecker::from_source(outcome.refined_source.as_ref().unwrap()).unwrap();
        let rescan = scan_corpus(dir.path(), &refined, &ScanConfig::default()).unwrap();
        let files: Vec<&str> = rescan.reports.iter().map(|r| r.file.as_str()).collect();
        assert_eq!(files, vec!["lib/honest.mc"]);
    }

    #[test]
    fn test_identity_refiner_exhausts_iterations() {
        let dir = tempfile::tempdir().unwrap();
        let (source, commit, scan) = setup(dir.path());
        let cases = fp_cases(&scan, dir.path());
        let mut gw =
            Gateway::new(Box::new(ScriptedProvider::with_refiner_mode(RefinerMode::Identity)));
        let outcome =
            refine(&mut gw, &request(&source, &cases, &commit, dir.path())).unwrap();
        assert!(!outcome.succeeded);
        assert_eq!(outcome.iterations.len(), 3);
        assert!(outcome
            .iterations
            .iter()
            .all(|i| i.reports_at_fp_sites == Some(1) && i.still_valid == Some(true)));
        assert!(outcome.refined_source.is_none());
    }

    #[test]
    fn test_report_deleting_refiner_fails_compilation_criterion() {
        let dir = tempfile::tempdir().unwrap();
        let (source, commit, scan) = setup(dir.path());
        let cases = fp_cases(&scan, dir.path());
        let mut gw = Gateway::new(Box::new(ScriptedProvider::with_refiner_mode(
            RefinerMode::DeleteReport,
        )));
        let outcome =
            refine(&mut gw, &request(&source, &cases, &commit, dir.path())).unwrap();
        assert!(!outcome.succeeded);
        assert!(outcome.iterations.iter().all(|i| !i.compiled));
    }

    #[test]
    fn test_refinement_that_breaks_validity_is_rejected() {
        // A silenced checker stops reporting at the FP sites, but it also
        // stops separating buggy from patched, so neither criterion alone
        // may accept it.
        let dir = tempfile::tempdir().unwrap();
        let (source, commit, scan) = setup(dir.path());
        let cases = fp_cases(&scan, dir.path());
        let mut gw =
            Gateway::new(Box::new(ScriptedProvider::with_refiner_mode(RefinerMode::Silence)));
        let outcome =
            refine(&mut gw, &request(&source, &cases, &commit, dir.path())).unwrap();
        assert!(!outcome.succeeded);
        assert_eq!(outcome.iterations.len(), 3);
        assert!(outcome.iterations.iter().all(
            |i| i.compiled && i.reports_at_fp_sites == Some(0) && i.still_valid == Some(false)
        ));
        assert!(outcome.refined_source.is_none());
    }

    #[test]
    fn test_refinement_without_fp_cases_is_a_precondition_violation() {
        let dir = tempfile::tempdir().unwrap();
        let (source, commit, _) = setup(dir.path());
        let mut gw = Gateway::new(Box::new(ScriptedProvider::new()));
        let err = refine(&mut gw, &request(&source, &[], &commit, dir.path())).unwrap_err();
        assert!(matches!(err, TriageError::PreconditionViolated));
    }

    #[test]
    fn test_thresholds_default_matches_refinement_limit() {
        // The plausibility and refinement knobs share their documented
        // defaults with the synthesis loop's.
        let t = PlausibilityThresholds::default();
        assert_eq!((t.t_plausible, t.sample_size, t.max_sample_fp), (20, 5, 1));
    }
}
