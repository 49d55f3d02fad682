use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};

/// One step of the story behind a report. The last entry always restates the
/// report itself, so a trace ends where the diagnostic fires.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub span: SourceSpan,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checker: String,
    pub file: String,
    pub span: SourceSpan,
    pub message: String,
    pub trace: Vec<TraceEntry>,
}

impl Report {
    /// Stable ordering used everywhere reports are listed or persisted.
    pub fn sort_key(&self) -> (String, u32, u32, String, String) {
        (
            self.file.clone(),
            self.span.line,
            self.span.col,
            self.message.clone(),
            self.checker.clone(),
        )
    }
}

pub fn sort_reports(reports: &mut [Report]) {
    reports.sort_by_key(Report::sort_key);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(file: &str, line: u32, col: u32, message: &str) -> Report {
        Report {
            checker: "c".to_string(),
            file: file.to_string(),
            span: SourceSpan::new(line, col),
            message: message.to_string(),
            trace: Vec::new(),
        }
    }

    #[test]
    fn test_sort_orders_by_file_then_position_then_message() {
        let mut reports = vec![
            report("b.mc", 1, 1, "z"),
            report("a.mc", 9, 2, "m"),
            report("a.mc", 9, 2, "a"),
            report("a.mc", 2, 7, "q"),
        ];
        sort_reports(&mut reports);
        let keys: Vec<(&str, u32, u32, &str)> = reports
            .iter()
            .map(|r| (r.file.as_str(), r.span.line, r.span.col, r.message.as_str()))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("a.mc", 2, 7, "q"),
                ("a.mc", 9, 2, "a"),
                ("a.mc", 9, 2, "m"),
                ("b.mc", 1, 1, "z"),
            ]
        );
    }
}
