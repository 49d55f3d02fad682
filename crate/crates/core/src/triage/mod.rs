//! Report triage and checker refinement.
//!
//! A scan's reports are distilled to the few source lines that matter, a
//! seeded sample is judged bug / not-a-bug, and the sample decides whether
//! the checker is plausible as-is, hopeless, or worth refining against the
//! false positives found.

mod distill;
mod metrics;
mod plausibility;
mod refine;

pub use distill::{distill, Distillation};
pub use metrics::{compute_metrics, ConfusionCounts, TriageMetrics};
pub use plausibility::{
    assess_plausibility, sample_indices, PlausibilityAssessment, PlausibilityReason,
    PlausibilityThresholds,
};
pub use refine::{refine, RefineRequest, RefinementIteration, RefinementOutcome};

use crate::gateway::{parse_front_matter, Gateway, GatewayError, Role, RoleInputs};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TriageError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Scan(#[from] crate::scanner::ScanError),
    #[error(transparent)]
    Pipeline(#[from] Box<crate::pipeline::PipelineError>),
    #[error("cannot read `{path}`: {reason}")]
    UnreadableSource { path: String, reason: String },
    #[error("refinement needs at least one false positive to work from")]
    PreconditionViolated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bug,
    NotABug,
}

/// One triaged report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriageVerdict {
    /// Position of the report in the scan's sorted report list.
    pub index: usize,
    pub verdict: Verdict,
    pub justification: String,
}

/// Asks the triage analyst about one distilled report. An answer without a
/// recognizable `verdict:` header is asked once more; if it still cannot be
/// parsed the report is conservatively kept as a bug — triage must never
/// silently drop findings.
pub fn triage(
    gateway: &mut Gateway,
    case: &Distillation,
) -> Result<TriageVerdict, TriageError> {
    for _ in 0..2 {
        let mut inputs = RoleInputs::new();
        inputs.insert("report".to_string(), case.text.clone());
        let answer = gateway.ask(Role::TriageAnalyst, inputs)?;
        let front = parse_front_matter(&answer);
        let verdict = match front.get("verdict").map(String::as_str) {
            Some("bug") => Some(Verdict::Bug),
            Some("not_a_bug") => Some(Verdict::NotABug),
            _ => None,
        };
        if let Some(verdict) = verdict {
            let justification = answer
                .split_once("\n\n")
                .map(|(_, rest)| rest.trim().to_string())
                .unwrap_or_default();
            return Ok(TriageVerdict { index: case.index, verdict, justification });
        }
    }
    Ok(TriageVerdict {
        index: case.index,
        verdict: Verdict::Bug,
        justification: "triage response had no parseable verdict; kept as a bug".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{CompletionRequest, LlmProvider, ScriptedProvider};

    fn case(text: &str) -> Distillation {
        Distillation {
            index: 0,
            checker: "C".to_string(),
            file: "f.mc".to_string(),
            line: 3,
            message: "m".to_string(),
            relevant_lines: vec![3],
            text: text.to_string(),
        }
    }

    #[test]
    fn test_triage_parses_scripted_verdict() {
        let mut gw = Gateway::new(Box::new(ScriptedProvider::new()));
        let text = "checker: C\nfile: f.mc\nline: 3\nmessage: m\n\nrelevant source:\n  2 |     int* p = get_buf(n);\n  3 |     *p = 7;\n";
        let verdict = triage(&mut gw, &case(text)).unwrap();
        assert_eq!(verdict.verdict, Verdict::Bug);
        assert!(!verdict.justification.is_empty());
    }

    #[test]
    fn test_unparseable_answers_retry_then_default_to_bug() {
        struct Garbled;
        impl LlmProvider for Garbled {
            fn id(&self) -> &str {
                "garbled"
            }
            fn complete(&self, _: &CompletionRequest) -> Result<String, GatewayError> {
                Ok("no verdict here".to_string())
            }
        }
        let mut gw = Gateway::new(Box::new(Garbled));
        let verdict = triage(&mut gw, &case("anything")).unwrap();
        assert_eq!(verdict.verdict, Verdict::Bug);
        assert_eq!(gw.transcript().len(), 2);
        assert!(verdict.justification.contains("kept as a bug"));
    }
}
