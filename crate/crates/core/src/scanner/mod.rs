//! Corpus scanning: run a compiled checker over every `.mc` file under a
//! root and merge the findings into one deterministic result.
//!
//! Files fan out across a worker pool, but the outcome is independent of
//! worker count and schedule: per-file results are merged in path order,
//! globally sorted, and only then cut to any report cap — so the capped
//! report list is always a prefix of the uncapped one. A file that fails to
//! parse or a function whose hooks abort is recorded and skipped without
//! disturbing the rest of the scan.

use crate::cdsl::CompiledChecker;
use crate::engine::{analyze_function, sort_reports, EngineBudget, EventHooks as _, Report};
use crate::SCHEMA_VERSION;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct ScanConfig {
    /// Worker threads for the file fan-out.
    pub jobs: usize,
    /// Keep at most this many reports (applied after the global sort).
    pub max_reports: Option<usize>,
    /// Stop picking up new files once this much wall time has passed.
    pub time_limit: Option<Duration>,
    pub budget: EngineBudget,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { jobs: 1, max_reports: None, time_limit: None, budget: EngineBudget::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub schema_version: u32,
    pub checker: String,
    pub reports: Vec<Report>,
    /// Reports were cut to `max_reports` after sorting.
    pub truncated: bool,
    /// The time limit expired before every file was visited.
    pub timed_out: bool,
    pub files_scanned: usize,
    pub skipped_files: Vec<SkippedFile>,
    pub failed_functions: Vec<FailedFunction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedFunction {
    pub path: String,
    pub function: String,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("cannot walk corpus at `{root}`: {reason}")]
    Walk { root: String, reason: String },
    #[error("cannot read `{path}`: {reason}")]
    Read { path: String, reason: String },
}

enum FileScan {
    Scanned {
        reports: Vec<Report>,
        failed: Vec<FailedFunction>,
    },
    Unparseable {
        reason: String,
    },
    NotVisited,
}

/// All `.mc` files under `root`, as corpus-relative slash paths in sorted
/// order.
pub fn corpus_files(root: &Path) -> Result<Vec<String>, ScanError> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| ScanError::Walk {
            root: root.display().to_string(),
            reason: e.to_string(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("mc") {
            continue;
        }
        let rel = path
            .strip_prefix(root)
            .expect("walkdir yields paths under its root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        files.push(rel);
    }
    files.sort();
    Ok(files)
}

pub fn scan_corpus(
    corpus_root: &Path,
    checker: &CompiledChecker,
    config: &ScanConfig,
) -> Result<ScanOutcome, ScanError> {
    let files = corpus_files(corpus_root)?;
    let sources = files
        .iter()
        .map(|rel| {
            std::fs::read_to_string(corpus_root.join(rel)).map_err(|e| ScanError::Read {
                path: rel.clone(),
                reason: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| ScanError::Walk { root: corpus_root.display().to_string(), reason: e.to_string() })?;

    let started = Instant::now();
    let out_of_time = AtomicBool::new(false);
    let scans: Vec<FileScan> = pool.install(|| {
        files
            .par_iter()
            .zip(sources.par_iter())
            .map(|(rel, source)| {
                if let Some(limit) = config.time_limit {
                    if out_of_time.load(Ordering::Relaxed) || started.elapsed() >= limit {
                        out_of_time.store(true, Ordering::Relaxed);
                        return FileScan::NotVisited;
                    }
                }
                scan_file(rel, source, checker, &config.budget)
            })
            .collect()
    });

    let mut reports = Vec::new();
    let mut skipped_files = Vec::new();
    let mut failed_functions = Vec::new();
    let mut files_scanned = 0;
    let mut timed_out = false;
    for (rel, scan) in files.iter().zip(scans) {
        match scan {
            FileScan::Scanned { reports: mut r, failed } => {
                files_scanned += 1;
                reports.append(&mut r);
                failed_functions.extend(failed);
            }
            FileScan::Unparseable { reason } => {
                files_scanned += 1;
                skipped_files.push(SkippedFile { path: rel.clone(), reason });
            }
            FileScan::NotVisited => timed_out = true,
        }
    }

    sort_reports(&mut reports);
    let truncated = match config.max_reports {
        Some(cap) if reports.len() > cap => {
            reports.truncate(cap);
            true
        }
        _ => false,
    };

    Ok(ScanOutcome {
        schema_version: SCHEMA_VERSION,
        checker: checker.checker_name().to_string(),
        reports,
        truncated,
        timed_out,
        files_scanned,
        skipped_files,
        failed_functions,
    })
}

fn scan_file(rel: &str, source: &str, checker: &CompiledChecker, budget: &EngineBudget) -> FileScan {
    let module = match crate::minilang::parse_module(source) {
        Ok(module) => module,
        Err(e) => return FileScan::Unparseable { reason: e.to_string() },
    };
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for function in &module.functions {
        match analyze_function(function, rel, checker, budget) {
            Ok(analysis) => reports.extend(analysis.reports),
            Err(err) => failed.push(FailedFunction {
                path: rel.to_string(),
                function: function.name.clone(),
                reason: err.to_string(),
            }),
        }
    }
    FileScan::Scanned { reports, failed }
}

/// Scans once per checker; one checker's problems never touch another's
/// results.
pub fn scan_many(
    corpus_root: &Path,
    checkers: &[CompiledChecker],
    config: &ScanConfig,
) -> Vec<Result<ScanOutcome, ScanError>> {
    checkers.iter().map(|checker| scan_corpus(corpus_root, checker, config)).collect()
}
