//! Command-line frontend: the pipeline's phases as subcommands over one
//! workspace directory.
//!
//! The workspace root defaults to the current directory and is expected to
//! hold `commits/` and `corpus/` (both overridable per subcommand);
//! artifacts land under `checkers/`, `reports/`, and `metrics/`.
//! Configuration comes from `<workspace>/knighter.toml` when present, then
//! `KF_*` environment variables, then flags.
//!
//! Exit codes: 0 on success, 1 when the pipeline itself says no (an invalid
//! checker, an implausible scan, a failed refinement) or when anything
//! errors, 2 on usage mistakes.

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use knighter_core::cdsl::{render_diagnostics, CompiledChecker};
use knighter_core::engine::EventHooks as _;
use knighter_core::patch::load_commit_bundle;
use knighter_core::pipeline::{
    gen_checker, validate_checker, DualRunOutcome, PipelineContext, SynthesisOutcome,
};
use knighter_core::scanner::{scan_corpus, ScanOutcome};
use knighter_core::triage::{
    assess_plausibility, refine, PlausibilityAssessment, RefineRequest, TriageMetrics,
};
use knighter_core::workspace::{
    emit_metrics, read_json, run_all, write_json, MetricsReport, ProviderKind, RunArgs,
    RunConfig, WorkspaceLayout,
};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "knighter", version, about = "Synthesize, vet, and run static-analysis checkers from patch commits")]
struct Cli {
    /// Workspace root; artifacts land under it.
    #[arg(long, global = true, default_value = ".")]
    workspace: PathBuf,

    /// Config file (default: <workspace>/knighter.toml when present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured provider (scripted, replay, live).
    #[arg(long, global = true)]
    provider: Option<ProviderKind>,

    /// Override the configured cassette path.
    #[arg(long, global = true)]
    cassette: Option<PathBuf>,

    /// Record every gateway exchange to the cassette.
    #[arg(long, global = true)]
    record: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a checker from one commit bundle.
    Synthesize {
        /// Commit bundle directory (message.txt + patch.diff).
        #[arg(long)]
        commit: PathBuf,
        /// Corpus root (default: <workspace>/corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Re-run dual-version validation of a checker against a commit.
    Validate {
        /// Checker source file.
        #[arg(long)]
        checker: PathBuf,
        #[arg(long)]
        commit: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Scan the corpus with a checker and store the report set.
    Scan {
        #[arg(long)]
        checker: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Worker threads (default: from config).
        #[arg(long)]
        jobs: Option<usize>,
        /// Where to write the scan (default: <workspace>/reports/<checker>/scan.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Judge a stored scan for plausibility by triaging a sample.
    Triage {
        /// scan.json produced by `scan`.
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Rework a checker against the false positives a triage found.
    Refine {
        #[arg(long)]
        checker: PathBuf,
        #[arg(long)]
        commit: PathBuf,
        /// triage.json holding the false-positive cases.
        #[arg(long)]
        triage: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Take every commit bundle through the full pipeline and emit metrics.
    RunAll {
        /// Commit bundles directory (default: <workspace>/commits).
        #[arg(long)]
        commits: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Recompute metrics from the workspace's persisted artifacts.
    Metrics,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let default_path = cli.workspace.join("knighter.toml");
    let path = match &cli.config {
        Some(path) => Some(path.clone()),
        None if default_path.exists() => Some(default_path),
        None => None,
    };
    let mut config = RunConfig::load_with_env(path.as_deref())?;
    if let Some(provider) = cli.provider {
        config.provider = provider;
    }
    if let Some(cassette) = &cli.cassette {
        // Flag-supplied paths resolve from the invocation directory, not
        // the config file's.
        config.cassette = Some(cassette.clone());
        config.base_dir = None;
    }
    if cli.record {
        config.record = true;
    }
    Ok(config)
}

fn load_checker(path: &Path) -> anyhow::Result<CompiledChecker> {
    let source = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read checker `{}`", path.display()))?;
    match CompiledChecker::from_source(&source) {
        Ok(checker) => Ok(checker),
        Err(diags) => bail!(
            "checker `{}` does not compile:\n{}",
            path.display(),
            render_diagnostics(&diags)
        ),
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let config = load_config(&cli)?;
    let layout = WorkspaceLayout::new(&cli.workspace);
    let corpus_for = |corpus: &Option<PathBuf>| match corpus {
        Some(path) => path.clone(),
        None => layout.corpus_dir(),
    };

    match &cli.command {
        Command::Synthesize { commit, corpus } => {
            let commit = load_commit_bundle(commit)?;
            let mut gateway = config.build_gateway()?;
            let checkers_dir = layout.checkers_dir();
            let mut ctx = PipelineContext {
                gateway: &mut gateway,
                corpus_root: &corpus_for(corpus),
                checkers_dir: &checkers_dir,
                limits: config.synthesis_limits(),
                budget: config.engine_budget(),
            };
            let record = gen_checker(&mut ctx, &commit)?;
            match record.outcome.as_ref().expect("synthesis reaches an outcome") {
                SynthesisOutcome::Valid { checker_name, verdict, .. } => {
                    println!(
                        "{}: valid checker {} (buggy {} / patched {}) after {} attempt(s)",
                        commit.id,
                        checker_name,
                        verdict.n_buggy,
                        verdict.n_patched,
                        record.attempts.len()
                    );
                    Ok(0)
                }
                SynthesisOutcome::Invalid { failure } => {
                    println!(
                        "{}: no valid checker after {} attempt(s) (last failure: {:?})",
                        commit.id,
                        record.attempts.len(),
                        failure
                    );
                    Ok(1)
                }
            }
        }

        Command::Validate { checker, commit, corpus } => {
            let compiled = load_checker(checker)?;
            let commit = load_commit_bundle(commit)?;
            let outcome = validate_checker(
                &compiled,
                &commit,
                &corpus_for(corpus),
                config.t_valid,
                &config.engine_budget(),
            )?;
            match outcome {
                DualRunOutcome::Verdict(verdict) => {
                    println!(
                        "{} on {}: buggy {} / patched {} -> {}",
                        compiled.checker_name(),
                        commit.id,
                        verdict.n_buggy,
                        verdict.n_patched,
                        if verdict.valid { "valid" } else { "not valid" }
                    );
                    Ok(if verdict.valid { 0 } else { 1 })
                }
                DualRunOutcome::Runtime(err) => {
                    println!("{} on {}: checker crashed: {err}", compiled.checker_name(), commit.id);
                    Ok(1)
                }
            }
        }

        Command::Scan { checker, corpus, jobs, out } => {
            let compiled = load_checker(checker)?;
            let mut scan_config = config.scan_config();
            if let Some(jobs) = jobs {
                scan_config.jobs = *jobs;
            }
            let scan = scan_corpus(&corpus_for(corpus), &compiled, &scan_config)?;
            let out = match out {
                Some(path) => path.clone(),
                None => layout.scan_json(compiled.checker_name()),
            };
            write_json(&out, &scan)?;
            println!(
                "{}: {} report(s) over {} file(s) -> {}",
                scan.checker,
                scan.reports.len(),
                scan.files_scanned,
                out.display()
            );
            Ok(0)
        }

        Command::Triage { scan, corpus } => {
            let scan: ScanOutcome = read_json(scan)?;
            let mut gateway = config.build_gateway()?;
            let assessment = assess_plausibility(
                &mut gateway,
                &scan,
                &corpus_for(corpus),
                &config.plausibility_thresholds(),
            )?;
            write_json(&layout.triage_json(&scan.checker), &assessment)?;
            gateway.drain_transcript_to(
                &layout.reports_dir(&scan.checker).join("transcript.jsonl"),
            )?;
            println!(
                "{}: {} report(s), {} sampled, {} false -> {}",
                scan.checker,
                assessment.report_count,
                assessment.sampled.len(),
                assessment.fp_in_sample,
                if assessment.plausible { "plausible" } else { "not plausible" }
            );
            Ok(if assessment.plausible { 0 } else { 1 })
        }

        Command::Refine { checker, commit, triage, corpus } => {
            let source = std::fs::read_to_string(checker)
                .with_context(|| format!("cannot read checker `{}`", checker.display()))?;
            let commit = load_commit_bundle(commit)?;
            let assessment: PlausibilityAssessment = read_json(triage)?;
            let corpus_root = corpus_for(corpus);
            let mut gateway = config.build_gateway()?;
            let outcome = refine(
                &mut gateway,
                &RefineRequest {
                    source: &source,
                    fp_cases: &assessment.fp_cases,
                    commit: &commit,
                    corpus_root: &corpus_root,
                    t_valid: config.t_valid,
                    max_iterations: config.max_refine_iterations,
                    scan: config.refine_scan_config(),
                    budget: config.engine_budget(),
                },
            )?;
            write_json(&layout.refinement_json(&outcome.checker), &outcome)?;
            gateway.drain_transcript_to(
                &layout.reports_dir(&outcome.checker).join("transcript.jsonl"),
            )?;
            if let Some(refined) = &outcome.refined_source {
                let path = layout.reports_dir(&outcome.checker).join("refined.cdsl");
                std::fs::write(&path, refined)?;
                println!(
                    "{}: refined in {} iteration(s) -> {}",
                    outcome.checker,
                    outcome.iterations.len(),
                    path.display()
                );
                Ok(0)
            } else {
                println!(
                    "{}: refinement failed after {} iteration(s)",
                    outcome.checker,
                    outcome.iterations.len()
                );
                Ok(1)
            }
        }

        Command::RunAll { commits, corpus } => {
            let commits_dir = match commits {
                Some(path) => path.clone(),
                None => layout.commits_dir(),
            };
            let summary = run_all(&RunArgs {
                corpus_root: &corpus_for(corpus),
                commits_dir: &commits_dir,
                workspace_root: &cli.workspace,
                config: &config,
            })?;
            for outcome in &summary.outcomes {
                println!(
                    "{}: {}{}",
                    outcome.commit_id,
                    outcome.classification.as_str(),
                    match &outcome.checker_name {
                        Some(name) => format!(
                            " ({name}, {} report(s))",
                            outcome.report_count.unwrap_or(0)
                        ),
                        None => String::new(),
                    }
                );
            }
            println!("metrics -> {}", layout.metrics_json().display());
            Ok(0)
        }

        Command::Metrics => {
            let metrics = emit_metrics(&layout, &config)?;
            write_json(&layout.metrics_json(), &metrics)?;
            print_metrics(&metrics);
            Ok(0)
        }
    }
}

fn print_metrics(metrics: &MetricsReport) {
    let c = &metrics.classifications;
    println!(
        "commits {} | invalid {} | direct {} | refined {} | fail {}",
        metrics.commits, c.invalid, c.direct, c.refined, c.fail
    );
    println!();
    println!(
        "{:<18} {:>7} {:>6} {:>7} {:>8} {:>5} {:>8}",
        "category", "commits", "valid", "direct", "refined", "fail", "invalid"
    );
    for row in &metrics.categories {
        println!(
            "{:<18} {:>7} {:>6} {:>7} {:>8} {:>5} {:>8}",
            row.category.label(),
            row.commits,
            row.valid,
            row.direct,
            row.refined,
            row.failed,
            row.invalid
        );
    }
    println!();
    let f = &metrics.failures;
    println!(
        "attempt failures: compilation {}, runtime {}, flags-neither {}, flags-both {}",
        f.compilation, f.runtime, f.flags_neither, f.flags_both
    );
    println!("triage sample: {}", triage_line(&metrics.triage));
}

fn triage_line(triage: &TriageMetrics) -> String {
    let show = |value: Option<f64>| match value {
        Some(v) => format!("{v:.3}"),
        None => "n/a".to_string(),
    };
    format!(
        "tp {}, fp {} | precision {} | recall {}",
        triage.counts.true_positives,
        triage.counts.false_positives,
        show(triage.precision),
        show(triage.recall)
    )
}
