//! Plausibility: decide from a scan whether a checker is worth keeping.
//!
//! A quiet checker — fewer reports than the cap — is plausible outright. A
//! noisy one gets a seeded random sample of its reports triaged; it stays
//! plausible only while the sample's false positives stay under the
//! allowance.

use super::{distill, triage, Distillation, TriageError, TriageVerdict, Verdict};
use crate::gateway::Gateway;
use crate::scanner::ScanOutcome;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlausibilityThresholds {
    /// Report counts below this skip sampling entirely.
    pub t_plausible: usize,
    /// How many reports to triage when sampling.
    pub sample_size: usize,
    /// Most false positives a passing sample may contain.
    pub max_sample_fp: usize,
    /// Seed for the sampling shuffle.
    pub seed: u64,
}

impl Default for PlausibilityThresholds {
    fn default() -> Self {
        PlausibilityThresholds { t_plausible: 20, sample_size: 5, max_sample_fp: 1, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlausibilityReason {
    /// Fewer reports than `t_plausible`; no sample needed.
    UnderReportCap,
    /// A sample was triaged and its false positives stayed within allowance.
    SampleClean,
    /// A sample was triaged and too many of its reports were false.
    SampleDirty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityAssessment {
    pub plausible: bool,
    pub reason: PlausibilityReason,
    pub report_count: usize,
    pub sampled: Vec<TriageVerdict>,
    pub fp_in_sample: usize,
    /// Distilled cases the sample judged false, ready to feed refinement.
    pub fp_cases: Vec<Distillation>,
}

/// The sorted indices of a seeded shuffle's first `sample_size` picks.
/// Sorting keeps downstream processing in report order without touching
/// which reports were picked.
pub fn sample_indices(total: usize, sample_size: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices.truncate(sample_size);
    indices.sort_unstable();
    indices
}

pub fn assess_plausibility(
    gateway: &mut Gateway,
    scan: &ScanOutcome,
    corpus_root: &Path,
    thresholds: &PlausibilityThresholds,
) -> Result<PlausibilityAssessment, TriageError> {
    let report_count = scan.reports.len();
    if report_count < thresholds.t_plausible {
        return Ok(PlausibilityAssessment {
            plausible: true,
            reason: PlausibilityReason::UnderReportCap,
            report_count,
            sampled: Vec::new(),
            fp_in_sample: 0,
            fp_cases: Vec::new(),
        });
    }

    let mut sampled = Vec::new();
    let mut fp_cases = Vec::new();
    for index in sample_indices(report_count, thresholds.sample_size, thresholds.seed) {
        let case = distill(&scan.reports[index], corpus_root, index)?;
        let verdict = triage(gateway, &case)?;
        if verdict.verdict == Verdict::NotABug {
            fp_cases.push(case);
        }
        sampled.push(verdict);
    }
    let fp_in_sample = fp_cases.len();
    let plausible = fp_in_sample <= thresholds.max_sample_fp;
    Ok(PlausibilityAssessment {
        plausible,
        reason: if plausible {
            PlausibilityReason::SampleClean
        } else {
            PlausibilityReason::SampleDirty
        },
        report_count,
        sampled,
        fp_in_sample,
        fp_cases,
    })
}
