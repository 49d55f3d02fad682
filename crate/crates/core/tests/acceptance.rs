//! Acceptance checks for the pipeline's core guarantees, one test per
//! guarantee. Each test states its tolerance inline and fails loudly when
//! the implementation drifts. The bundled workspace under `fixtures/` at the
//! repository root provides the commits and corpus for the end-to-end runs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use knighter_core::cdsl::exemplars::exemplars;
use knighter_core::cdsl::CompiledChecker;
use knighter_core::engine::oracle::oracle_report_set;
use knighter_core::engine::{analyze_function, EngineBudget, Report, TraceEntry};
use knighter_core::gateway::{Gateway, RefinerMode, ScriptedProvider};
use knighter_core::minilang::generate::{generate_function, GenConfig};
use knighter_core::minilang::parse_module;
use knighter_core::patch::load_commit_bundle;
use knighter_core::pipeline::{
    gen_checker, validate_checker, AttemptFailure, DualRunOutcome, PipelineContext,
    SynthesisLimits, SynthesisOutcome, ValidationVerdict,
};
use knighter_core::scanner::{scan_corpus, ScanConfig, ScanOutcome};
use knighter_core::triage::{
    assess_plausibility, compute_metrics, refine, sample_indices, ConfusionCounts,
    PlausibilityReason, PlausibilityThresholds, RefineRequest,
};
use knighter_core::workspace::{run_all, Classification, CommitOutcome, ProviderKind, RunArgs, RunConfig};
use knighter_core::SourceSpan;

fn fixtures_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn scripted_gateway() -> Gateway {
    Gateway::new(Box::new(ScriptedProvider::new()))
}

#[test]
fn a1_validity_predicate_is_exact_over_the_full_grid() {
    let start = Instant::now();
    let t_valid = 50;
    for n_buggy in 0..=200usize {
        for n_patched in 0..=200usize {
            let expected = n_buggy > n_patched && n_patched < t_valid;
            let verdict = ValidationVerdict::new(n_buggy, n_patched, t_valid);
            assert_eq!(
                verdict.valid, expected,
                "validity disagrees at n_buggy={n_buggy}, n_patched={n_patched}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "grid check took {elapsed:?}, budget is 1s");
    println!("PASS: validity predicate exact over (0..=200)^2 in {elapsed:?}");
}

/// Tracks an acquire/release pair so the differential run also exercises
/// end-of-function quantification, which the bundled example checkers never
/// use.
const LEAK_CHECKER: &str = r#"checker Leak_get_buf {
    map Acq { Open }
    uses alias_map;

    template leak = "get_buf result leaked at function end";

    on post_call where callee_is("get_buf") {
        set_state(Acq, return_region, Open);
    }

    on pre_call where callee_is("release_buf") {
        clear_state(Acq, arg_region(0));
    }

    on bind {
        propagate_alias(lhs, rhs);
    }

    on end_function where state_is(Acq, leaked, Open) {
        report(leak, leaked);
    }
}
"#;

#[test]
fn a2_engine_agrees_with_path_oracle_on_generated_programs() {
    let start = Instant::now();
    let mut checkers: Vec<CompiledChecker> = exemplars()
        .iter()
        .map(|ex| CompiledChecker::from_source(ex.checker).expect("example checker compiles"))
        .collect();
    checkers.push(CompiledChecker::from_source(LEAK_CHECKER).expect("leak checker compiles"));

    let config = GenConfig::default();
    let budget = EngineBudget::default();
    assert_eq!(budget.loop_unroll, 2);

    for seed in 0..1000u64 {
        let src = generate_function(seed, &config);
        let module = parse_module(&src)
            .unwrap_or_else(|err| panic!("seed {seed} failed to parse: {err}\n{src}"));
        let func = &module.functions[0];
        for checker in &checkers {
            let analysis = analyze_function(func, "gen.mc", checker, &budget)
                .unwrap_or_else(|err| panic!("seed {seed}: checker crashed: {err}\n{src}"));
            assert!(!analysis.truncated, "seed {seed} exhausted the node budget\n{src}");
            let engine_keys: BTreeSet<(SourceSpan, String)> =
                analysis.reports.iter().map(|r| (r.span, r.message.clone())).collect();
            let oracle_keys = oracle_report_set(func, checker, &budget)
                .unwrap_or_else(|err| panic!("seed {seed} not oracle-supported: {err}\n{src}"));
            assert_eq!(
                engine_keys, oracle_keys,
                "seed {seed}: engine and oracle disagree\n{src}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "differential run took {elapsed:?}, budget is 60s");
    println!("PASS: engine/oracle agreement on 1000 generated functions in {elapsed:?}");
}

#[test]
fn a3_bundled_workspace_runs_end_to_end_and_revalidates() {
    let start = Instant::now();
    let fixtures = fixtures_root();
    let corpus_root = fixtures.join("corpus");
    let commits_dir = fixtures.join("commits");
    let config = RunConfig::load(&fixtures.join("knighter.toml")).expect("bundled config loads");
    let ws = tempfile::tempdir().unwrap();

    let summary = run_all(&RunArgs {
        corpus_root: &corpus_root,
        commits_dir: &commits_dir,
        workspace_root: ws.path(),
        config: &config,
    })
    .expect("bundled workspace runs clean");

    assert_eq!(summary.outcomes.len(), 6);
    let valid: Vec<&CommitOutcome> = summary
        .outcomes
        .iter()
        .filter(|o| o.classification != Classification::Invalid)
        .collect();
    assert!(valid.len() >= 5, "only {} commits yielded valid checkers", valid.len());

    let categories: BTreeSet<_> = valid.iter().filter_map(|o| o.category).collect();
    assert!(
        categories.len() >= 3,
        "valid checkers span only {categories:?}, need at least three categories"
    );

    let budget = config.engine_budget();
    for outcome in &valid {
        let source = std::fs::read_to_string(
            ws.path().join("checkers").join(&outcome.commit_id).join("checker.cdsl"),
        )
        .expect("valid commit stores its checker");
        let checker = CompiledChecker::from_source(&source).expect("stored checker recompiles");
        let commit = load_commit_bundle(&commits_dir.join(&outcome.commit_id)).unwrap();
        match validate_checker(&checker, &commit, &corpus_root, config.t_valid, &budget).unwrap()
        {
            DualRunOutcome::Verdict(v) => assert_eq!(
                outcome.verdict,
                Some(v),
                "{}: stored verdict does not reproduce",
                outcome.commit_id
            ),
            DualRunOutcome::Runtime(err) => {
                panic!("{}: stored checker crashed on revalidation: {err}", outcome.commit_id)
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "end-to-end run took {elapsed:?}, budget is 2min");
    println!(
        "PASS: {} of 6 commits valid across {:?} with verdicts reproducing in {elapsed:?}",
        valid.len(),
        categories
    );
}

#[test]
fn a4_repair_budget_converges_and_never_overruns() {
    let fixtures = fixtures_root();
    let commit = load_commit_bundle(&fixtures.join("commits/npd-001")).unwrap();
    let corpus_root = fixtures.join("corpus");

    // Two spoiled outputs: the initial implementation and the first repair
    // both come back truncated, the second repair lands.
    let dir = tempfile::tempdir().unwrap();
    let mut gateway = Gateway::new(Box::new(ScriptedProvider::with_faults(2)));
    let mut ctx = PipelineContext {
        gateway: &mut gateway,
        corpus_root: &corpus_root,
        checkers_dir: dir.path(),
        limits: SynthesisLimits::default(),
        budget: EngineBudget::default(),
    };
    let record = gen_checker(&mut ctx, &commit).unwrap();
    assert!(matches!(record.outcome, Some(SynthesisOutcome::Valid { .. })));
    assert_eq!(record.attempts.len(), 1, "two faults must converge within one iteration");
    assert_eq!(record.attempts[0].repair_rounds, 2);
    assert!(record.attempts[0].compiled);

    // Six spoiled outputs exhaust one full repair budget (implementation
    // plus five repairs), producing a compilation-failure attempt; the next
    // iteration starts clean and succeeds.
    let dir = tempfile::tempdir().unwrap();
    let mut gateway = Gateway::new(Box::new(ScriptedProvider::with_faults(6)));
    let mut ctx = PipelineContext {
        gateway: &mut gateway,
        corpus_root: &corpus_root,
        checkers_dir: dir.path(),
        limits: SynthesisLimits::default(),
        budget: EngineBudget::default(),
    };
    let record = gen_checker(&mut ctx, &commit).unwrap();
    assert!(matches!(record.outcome, Some(SynthesisOutcome::Valid { .. })));
    assert_eq!(record.attempts.len(), 2, "six faults must cost exactly one iteration");
    assert!(!record.attempts[0].compiled);
    assert!(matches!(record.attempts[0].failure, Some(AttemptFailure::Compilation { .. })));
    assert_eq!(record.attempts[0].repair_rounds, 5);
    assert!(record.attempts[1].compiled);

    for record in [&record] {
        assert!(record.attempts.len() <= 10, "iteration budget overrun");
        for attempt in &record.attempts {
            assert!(attempt.repair_rounds <= 5, "repair budget overrun");
        }
    }
    println!("PASS: repair loop converges at k=2, records a compilation failure at k=6");
}

/// Writes the two scan-target files plausibility triage reads, returning
/// a ready-made honest report and a vetted (false-positive-looking) one.
fn plausibility_corpus(root: &Path) -> (Report, Report) {
    std::fs::create_dir_all(root.join("lib")).unwrap();
    std::fs::write(
        root.join("lib/honest.mc"),
        "int honest(int n) {\n    int* buf = get_buf(n);\n    *buf = 1;\n    return 0;\n}\n",
    )
    .unwrap();
    std::fs::write(
        root.join("lib/vetted.mc"),
        "int vetted(int n) {\n    int* p = get_buf(n);\n    validate_buf(p);\n    *p = n;\n    return 0;\n}\n",
    )
    .unwrap();
    let honest = Report {
        checker: "Npd_get_buf".to_string(),
        file: "lib/honest.mc".to_string(),
        span: SourceSpan::new(3, 5),
        message: "possible NULL dereference of unchecked get_buf result".to_string(),
        trace: vec![TraceEntry {
            span: SourceSpan::new(2, 15),
            note: "get_buf result tracked".to_string(),
        }],
    };
    let vetted = Report {
        checker: "Npd_get_buf".to_string(),
        file: "lib/vetted.mc".to_string(),
        span: SourceSpan::new(4, 5),
        message: "possible NULL dereference of unchecked get_buf result".to_string(),
        trace: vec![
            TraceEntry { span: SourceSpan::new(2, 14), note: "get_buf result tracked".to_string() },
            TraceEntry { span: SourceSpan::new(3, 5), note: "argument passed on".to_string() },
        ],
    };
    (honest, vetted)
}

fn scan_with(reports: Vec<Report>) -> ScanOutcome {
    ScanOutcome {
        schema_version: 1,
        checker: "Npd_get_buf".to_string(),
        reports,
        truncated: false,
        timed_out: false,
        files_scanned: 2,
        skipped_files: Vec::new(),
        failed_functions: Vec::new(),
    }
}

#[test]
fn a5_plausibility_thresholds_and_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let (honest, vetted) = plausibility_corpus(dir.path());
    let thresholds = PlausibilityThresholds::default();
    assert_eq!((thresholds.t_plausible, thresholds.sample_size, thresholds.max_sample_fp), (20, 5, 1));
    let mut gateway = scripted_gateway();

    // Below the report cap nothing is sampled.
    let small = scan_with(vec![honest.clone(); 19]);
    let assessment =
        assess_plausibility(&mut gateway, &small, dir.path(), &thresholds).unwrap();
    assert!(assessment.plausible);
    assert_eq!(assessment.reason, PlausibilityReason::UnderReportCap);
    assert!(assessment.sampled.is_empty());

    // At 40 reports a 5-report sample is triaged; one false positive in the
    // sample is tolerated.
    let picked = sample_indices(40, thresholds.sample_size, thresholds.seed);
    assert_eq!(picked.len(), 5);
    let mut reports = vec![honest.clone(); 40];
    reports[picked[0]] = vetted.clone();
    let one_fp = scan_with(reports);
    let assessment =
        assess_plausibility(&mut gateway, &one_fp, dir.path(), &thresholds).unwrap();
    assert!(assessment.plausible);
    assert_eq!(assessment.reason, PlausibilityReason::SampleClean);
    assert_eq!(assessment.fp_in_sample, 1);

    // Two sampled false positives exceed the allowance.
    let mut reports = vec![honest.clone(); 40];
    reports[picked[0]] = vetted.clone();
    reports[picked[1]] = vetted.clone();
    let two_fp = scan_with(reports);
    let dirty = assess_plausibility(&mut gateway, &two_fp, dir.path(), &thresholds).unwrap();
    assert!(!dirty.plausible);
    assert_eq!(dirty.reason, PlausibilityReason::SampleDirty);
    assert_eq!(dirty.fp_in_sample, 2);

    // The seeded sample is reproducible run over run.
    for _ in 0..10 {
        assert_eq!(sample_indices(40, thresholds.sample_size, thresholds.seed), picked);
        let again = assess_plausibility(&mut gateway, &one_fp, dir.path(), &thresholds).unwrap();
        assert_eq!(again, assessment);
    }
    println!("PASS: plausibility thresholds, FP allowance, and seeded sampling all hold");
}

/// A checker identical to the bundled NULL-deref example but aimed at
/// `get_buf`, whose corpus below contains one vetted caller the checker
/// wrongly flags.
fn get_buf_checker() -> String {
    exemplars()[0].checker.replace("devm_kzalloc", "get_buf")
}

fn refinement_scenario(root: &Path) -> knighter_core::patch::PatchCommit {
    std::fs::create_dir_all(root.join("corpus/lib")).unwrap();
    std::fs::write(
        root.join("corpus/lib/fixed.mc"),
        "int fixed(int n) {\n    int* p = get_buf(n);\n    if (!p) {\n        return -12;\n    }\n    *p = n;\n    return 0;\n}\n",
    )
    .unwrap();
    std::fs::write(
        root.join("corpus/lib/vetted.mc"),
        "int vetted(int n) {\n    int* p = get_buf(n);\n    validate_buf(p);\n    *p = n;\n    return 0;\n}\n",
    )
    .unwrap();
    std::fs::write(
        root.join("corpus/lib/honest.mc"),
        "int honest(int n) {\n    int* buf = get_buf(n);\n    *buf = 1;\n    return 0;\n}\n",
    )
    .unwrap();
    let bundle = root.join("commit");
    std::fs::create_dir_all(&bundle).unwrap();
    std::fs::write(bundle.join("message.txt"), "lib: check get_buf result\n").unwrap();
    std::fs::write(
        bundle.join("patch.diff"),
        "--- a/lib/fixed.mc\n+++ b/lib/fixed.mc\n@@ -1,5 +1,8 @@\n int fixed(int n) {\n     int* p = get_buf(n);\n+    if (!p) {\n+        return -12;\n+    }\n     *p = n;\n     return 0;\n }\n",
    )
    .unwrap();
    load_commit_bundle(&bundle).unwrap()
}

#[test]
fn a6_refinement_accepts_fp_free_checkers_and_rejects_validity_breakers() {
    let dir = tempfile::tempdir().unwrap();
    let commit = refinement_scenario(dir.path());
    let corpus_root = dir.path().join("corpus");
    let source = get_buf_checker();
    let checker = CompiledChecker::from_source(&source).unwrap();
    let budget = EngineBudget::default();
    let scan_config = ScanConfig::default();

    // Force sampling with a zero-FP allowance so the vetted caller turns up
    // as a false-positive case.
    let scan = scan_corpus(&corpus_root, &checker, &scan_config).unwrap();
    assert_eq!(scan.reports.len(), 2);
    let thresholds =
        PlausibilityThresholds { t_plausible: 2, sample_size: 2, max_sample_fp: 0, seed: 0 };
    let mut gateway = scripted_gateway();
    let assessment =
        assess_plausibility(&mut gateway, &scan, &corpus_root, &thresholds).unwrap();
    assert!(!assessment.plausible);
    assert_eq!(assessment.fp_cases.len(), 1);

    let request = RefineRequest {
        source: &source,
        fp_cases: &assessment.fp_cases,
        commit: &commit,
        corpus_root: &corpus_root,
        t_valid: 50,
        max_iterations: 3,
        scan: scan_config.clone(),
        budget: budget.clone(),
    };
    let outcome = refine(&mut gateway, &request).unwrap();
    assert!(outcome.succeeded, "guarded refinement must be accepted: {outcome:?}");
    assert!(outcome.iterations.len() <= 3);

    // Independently confirm the acceptance conditions on the refined source:
    // silent on the prior false-positive site, still separating the commit's
    // buggy and patched versions.
    let refined_source = outcome.refined_source.expect("accepted refinement carries source");
    let refined = CompiledChecker::from_source(&refined_source).unwrap();
    let rescide = scan_corpus(&corpus_root, &refined, &scan_config).unwrap();
    let fp_files: Vec<_> = assessment.fp_cases.iter().map(|c| c.file.as_str()).collect();
    assert!(
        rescide.reports.iter().all(|r| !fp_files.contains(&r.file.as_str())),
        "refined checker still reports on prior FP cases: {:?}",
        rescide.reports
    );
    match validate_checker(&refined, &commit, &corpus_root, 50, &budget).unwrap() {
        DualRunOutcome::Verdict(v) => assert!(v.valid, "refined checker lost validity: {v:?}"),
        DualRunOutcome::Runtime(err) => panic!("refined checker crashed: {err}"),
    }

    // A refinement that silences the false positives by silencing everything
    // fails the validity half of the acceptance test and is rejected.
    let mut silencing =
        Gateway::new(Box::new(ScriptedProvider::with_refiner_mode(RefinerMode::Silence)));
    let rejected = refine(&mut silencing, &request).unwrap();
    assert!(!rejected.succeeded, "validity-breaking refinement must be rejected");
    assert!(rejected.refined_source.is_none());
    assert!(rejected
        .iterations
        .iter()
        .all(|it| it.still_valid == Some(false) && it.reports_at_fp_sites == Some(0)));
    println!("PASS: refinement accepted within 3 iterations; validity-breaking rewrite rejected");
}

#[test]
fn a7_triage_metric_arithmetic() {
    let metrics = compute_metrics(&ConfusionCounts::new(7, 22, 50, 0));
    let precision = metrics.precision.expect("nonzero flagged population");
    assert!(
        (precision - 0.2414).abs() <= 1e-4,
        "precision {precision} departs from 0.2414 by more than 1e-4"
    );
    assert_eq!(metrics.recall, Some(1.0));

    // 61 of 90 reports confirmed: the unconfirmed share is the working
    // false-positive rate of the scan.
    let counts = ConfusionCounts::new(61, 29, 0, 0);
    let fp_share = counts.false_positives as f64 / counts.total() as f64;
    assert!(
        (fp_share - 0.322).abs() <= 1e-3,
        "false-positive share {fp_share} departs from 0.322 by more than 0.001"
    );
    let metrics = compute_metrics(&counts);
    let complement = 1.0 - metrics.precision.unwrap();
    assert!((complement - fp_share).abs() < 1e-12);
    println!("PASS: precision 0.2414, recall 1.0, and 32.2% FP share all reproduce");
}

#[test]
fn a8_corpus_scan_is_deterministic_across_worker_counts() {
    let corpus_root = fixtures_root().join("corpus");
    let checker = CompiledChecker::from_source(exemplars()[0].checker).unwrap();

    let mut outcomes = Vec::new();
    for jobs in [1usize, 4, 32] {
        let config = ScanConfig { jobs, ..ScanConfig::default() };
        outcomes.push(scan_corpus(&corpus_root, &checker, &config).unwrap());
    }
    assert_eq!(outcomes[0].files_scanned, 12);
    assert_eq!(outcomes[0].reports, outcomes[1].reports, "jobs=1 and jobs=4 disagree");
    assert_eq!(outcomes[0].reports, outcomes[2].reports, "jobs=1 and jobs=32 disagree");

    let found: BTreeSet<(String, SourceSpan)> =
        outcomes[0].reports.iter().map(|r| (r.file.clone(), r.span)).collect();
    let expected: BTreeSet<(String, SourceSpan)> = [
        ("net/ring_attach.mc".to_string(), SourceSpan::new(3, 5)),
        ("net/ring_attach.mc".to_string(), SourceSpan::new(9, 5)),
        ("net/ring_attach.mc".to_string(), SourceSpan::new(15, 5)),
    ]
    .into_iter()
    .collect();
    assert_eq!(found, expected, "scan must find the three seeded bugs and nothing else");
    println!("PASS: identical reports at jobs 1/4/32; exactly the 3 seeded spans found");
}

#[test]
fn a9_record_then_replay_reproduces_artifacts_byte_for_byte() {
    let fixtures = fixtures_root();
    let corpus_root = fixtures.join("corpus");
    let commits_dir = fixtures.join("commits");
    let dir = tempfile::tempdir().unwrap();
    let cassette = dir.path().join("cassette.jsonl");

    let mut record_config = RunConfig::load(&fixtures.join("knighter.toml")).unwrap();
    record_config.record = true;
    record_config.cassette = Some(cassette.clone());
    let ws_record = dir.path().join("ws_record");
    run_all(&RunArgs {
        corpus_root: &corpus_root,
        commits_dir: &commits_dir,
        workspace_root: &ws_record,
        config: &record_config,
    })
    .unwrap();
    assert!(cassette.exists(), "record mode must write the cassette");

    let mut replay_config = record_config.clone();
    replay_config.record = false;
    replay_config.provider = ProviderKind::Replay;
    let ws_replay = dir.path().join("ws_replay");
    run_all(&RunArgs {
        corpus_root: &corpus_root,
        commits_dir: &commits_dir,
        workspace_root: &ws_replay,
        config: &replay_config,
    })
    .unwrap();

    let mut checkers_compared = 0;
    for entry in std::fs::read_dir(ws_record.join("checkers")).unwrap() {
        let recorded_dir = entry.unwrap().path();
        let commit_id = recorded_dir.file_name().unwrap().to_string_lossy().into_owned();
        let replayed_dir = ws_replay.join("checkers").join(&commit_id);

        let recorded_outcome = std::fs::read(recorded_dir.join("outcome.json")).unwrap();
        let replayed_outcome = std::fs::read(replayed_dir.join("outcome.json")).unwrap();
        assert_eq!(recorded_outcome, replayed_outcome, "{commit_id}: verdicts differ");

        let checker = recorded_dir.join("checker.cdsl");
        if checker.exists() {
            let recorded = std::fs::read(&checker).unwrap();
            let replayed = std::fs::read(replayed_dir.join("checker.cdsl")).unwrap();
            assert_eq!(recorded, replayed, "{commit_id}: checker sources differ");
            checkers_compared += 1;
        }
    }
    assert!(checkers_compared >= 5, "expected at least 5 recorded checkers");
    println!("PASS: replay reproduced {checkers_compared} checkers and all verdicts byte-for-byte");
}
