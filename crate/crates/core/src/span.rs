use serde::{Deserialize, Serialize};

/// A source position, 1-based in both coordinates.
///
/// Spans mark the first character of the construct they belong to. They are
/// carried by every AST node and every engine event so that reports can point
/// back at the offending line without re-scanning the source.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub col: u32,
}

impl SourceSpan {
    pub fn new(line: u32, col: u32) -> Self {
        SourceSpan { line, col }
    }
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}
