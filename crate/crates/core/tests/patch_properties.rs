//! Property tests for patch application: constructed edits must apply,
//! reverse, invert, and render back without losing a byte.

use knighter_core::patch::{
    apply_patch, invert_diff, parse_patch, render_diff, Direction, FileDiff, Hunk, HunkLine,
};
use proptest::prelude::*;

fn line() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_ ;(){}*=]{0,24}"
}

/// A whole-file hunk that replaces `removed` lines at `start` with `added`.
fn build_diff(base: &[String], start: usize, removed: usize, added: &[String]) -> (FileDiff, Vec<String>) {
    let mut lines = Vec::new();
    for l in &base[..start] {
        lines.push(HunkLine::Context(l.clone()));
    }
    for l in &base[start..start + removed] {
        lines.push(HunkLine::Removed(l.clone()));
    }
    for l in added {
        lines.push(HunkLine::Added(l.clone()));
    }
    for l in &base[start + removed..] {
        lines.push(HunkLine::Context(l.clone()));
    }
    let new: Vec<String> = base[..start]
        .iter()
        .chain(added.iter())
        .chain(base[start + removed..].iter())
        .cloned()
        .collect();
    let hunk = Hunk {
        old_start: 1,
        old_len: base.len() as u32,
        new_start: if new.is_empty() { 0 } else { 1 },
        new_len: new.len() as u32,
        section: String::new(),
        lines,
    };
    (FileDiff { path: "lib/generated.mc".to_string(), hunks: vec![hunk] }, new)
}

fn to_text(lines: &[String]) -> String {
    if lines.is_empty() {
        return String::new();
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// Forward application produces the edited text, reverse application
    /// recovers the original, and inversion is an involution.
    #[test]
    fn apply_reverse_and_invert_agree(
        base in prop::collection::vec(line(), 1..20),
        raw_start in any::<usize>(),
        raw_removed in any::<usize>(),
        added in prop::collection::vec(line(), 0..6),
    ) {
        let start = raw_start % (base.len() + 1);
        let removed = raw_removed % (base.len() - start + 1);
        // A file of nothing but empty lines cannot survive deletion down to
        // zero lines and back: "" and "\n" collapse to the same line set.
        // Corpus patches always edit within a file, so keep the new side
        // non-empty here and let the oracle cover every in-file edit.
        prop_assume!(removed < base.len() || !added.is_empty());
        let (diff, new_lines) = build_diff(&base, start, removed, &added);
        let base_text = to_text(&base);
        let new_text = to_text(&new_lines);

        prop_assert_eq!(apply_patch(&base_text, &diff, Direction::Forward).unwrap(), new_text.clone());
        prop_assert_eq!(apply_patch(&new_text, &diff, Direction::Reverse).unwrap(), base_text.clone());

        let inverse = invert_diff(&diff);
        prop_assert_eq!(apply_patch(&new_text, &inverse, Direction::Forward).unwrap(), base_text);
        prop_assert_eq!(invert_diff(&inverse), diff);
    }

    /// Rendering a diff and parsing it back reproduces the same structure.
    #[test]
    fn render_then_parse_round_trips(
        base in prop::collection::vec(line(), 1..20),
        raw_start in any::<usize>(),
        raw_removed in any::<usize>(),
        added in prop::collection::vec(line(), 0..6),
    ) {
        let start = raw_start % (base.len() + 1);
        let removed = raw_removed % (base.len() - start + 1);
        let (diff, _) = build_diff(&base, start, removed, &added);

        let rendered = render_diff(std::slice::from_ref(&diff));
        let (message, parsed) = parse_patch(&rendered).unwrap();
        prop_assert!(message.is_empty(), "rendering must not invent a message: {message:?}");
        prop_assert_eq!(parsed, vec![diff]);
    }
}
