//! Report distillation: shrink a report to the lines a reviewer actually
//! needs — the trace's source lines plus the flagged line — rendered with
//! their original line numbers.

use super::TriageError;
use crate::engine::Report;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distillation {
    pub index: usize,
    pub checker: String,
    pub file: String,
    pub line: u32,
    pub message: String,
    /// Sorted, deduplicated line numbers the case touches.
    pub relevant_lines: Vec<u32>,
    /// The rendered block handed to the triage analyst.
    pub text: String,
}

pub fn distill(
    report: &Report,
    corpus_root: &Path,
    index: usize,
) -> Result<Distillation, TriageError> {
    let source = std::fs::read_to_string(corpus_root.join(&report.file)).map_err(|e| {
        TriageError::UnreadableSource { path: report.file.clone(), reason: e.to_string() }
    })?;
    let lines: Vec<&str> = source.lines().collect();

    let mut relevant: Vec<u32> = report.trace.iter().map(|t| t.span.line).collect();
    relevant.push(report.span.line);
    relevant.sort_unstable();
    relevant.dedup();

    let mut text = format!(
        "checker: {}\nfile: {}\nline: {}\nmessage: {}\n\nrelevant source:\n",
        report.checker, report.file, report.span.line, report.message
    );
    for &line in &relevant {
        let content = lines.get(line as usize - 1).copied().unwrap_or("");
        let _ = writeln!(text, "{line:>4} | {content}");
    }

    Ok(Distillation {
        index,
        checker: report.checker.clone(),
        file: report.file.clone(),
        line: report.span.line,
        message: report.message.clone(),
        relevant_lines: relevant,
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdsl::exemplars::exemplars;
    use crate::cdsl::CompiledChecker;
    use crate::engine::{analyze_function, EngineBudget};
    use crate::minilang::parse_module;

    const VETTED: &str = r#"int widget_use(int n) {
    int* p = get_buf(n);
    validate_buf(p);
    *p = n;
    return 0;
}
"#;

    fn report_for(source: &str, dir: &Path, rel: &str) -> Report {
        std::fs::create_dir_all(dir.join(Path::new(rel).parent().unwrap())).unwrap();
        std::fs::write(dir.join(rel), source).unwrap();
        let checker_src = exemplars()[0].checker.replace("devm_kzalloc", "get_buf");
        let checker = CompiledChecker::from_source(&checker_src).unwrap();
        let module = parse_module(source).unwrap();
        let analysis =
            analyze_function(&module.functions[0], rel, &checker, &EngineBudget::default())
                .unwrap();
        analysis.reports.into_iter().next().expect("one report")
    }

    #[test]
    fn test_distillation_keeps_trace_and_flagged_lines_only() {
        let dir = tempfile::tempdir().unwrap();
        let report = report_for(VETTED, dir.path(), "lib/widget.mc");
        let d = distill(&report, dir.path(), 3).unwrap();
        assert_eq!(d.index, 3);
        assert_eq!(d.relevant_lines, vec![2, 3, 4]);
        assert!(d.text.contains("checker: Npd_get_buf"));
        assert!(d.text.contains("   2 |     int* p = get_buf(n);"));
        assert!(d.text.contains("   3 |     validate_buf(p);"));
        assert!(d.text.contains("   4 |     *p = n;"));
        assert!(!d.text.contains("return 0;"));
    }

    #[test]
    fn test_distilled_vetting_line_flips_scripted_triage() {
        let dir = tempfile::tempdir().unwrap();
        let report = report_for(VETTED, dir.path(), "lib/widget.mc");
        let d = distill(&report, dir.path(), 0).unwrap();
        let mut gw = crate::gateway::Gateway::new(Box::new(
            crate::gateway::ScriptedProvider::new(),
        ));
        let verdict = super::super::triage(&mut gw, &d).unwrap();
        assert_eq!(verdict.verdict, super::super::Verdict::NotABug);
    }

    #[test]
    fn test_missing_source_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let report = Report {
            checker: "C".to_string(),
            file: "gone.mc".to_string(),
            span: crate::SourceSpan::new(1, 1),
            message: "m".to_string(),
            trace: Vec::new(),
        };
        let err = distill(&report, dir.path(), 0).unwrap_err();
        assert!(matches!(err, TriageError::UnreadableSource { .. }));
    }
}
