use std::collections::BTreeMap;
use std::path::Path;

use crate::minilang::{parse_module, FunctionDef};

use super::{apply_patch, invert_diff, Direction, FileDiff, FunctionContext, PatchCommit, PatchError};

/// Finds every function a commit modifies and returns both versions of its
/// text.
///
/// The corpus holds post-patch files, so the pre-patch text is recovered by
/// reverse application. A function is "modified" when its line range overlaps
/// a hunk on either side; one context is emitted per (path, function) no
/// matter how many hunks land in it, ordered by path and then by the
/// function's start line. Context stops at function boundaries: callers and
/// callees of the modified function are not pulled in.
pub fn extract_function_contexts(
    commit: &PatchCommit,
    corpus_root: &Path,
) -> Result<Vec<FunctionContext>, PatchError> {
    let mut contexts = Vec::new();
    let mut diffs: Vec<&FileDiff> = commit.diffs.iter().collect();
    diffs.sort_by(|a, b| a.path.cmp(&b.path));

    for diff in diffs {
        let full_path = corpus_root.join(&diff.path);
        if !full_path.exists() {
            return Err(PatchError::MissingFile { path: diff.path.clone() });
        }
        let post_text = std::fs::read_to_string(&full_path).map_err(|source| PatchError::Io {
            path: diff.path.clone(),
            source,
        })?;
        let pre_text = apply_patch(&post_text, diff, Direction::Reverse)?;

        let parse = |text: &str| {
            parse_module(text).map_err(|source| PatchError::UnparseableFile {
                path: diff.path.clone(),
                source,
            })
        };
        let pre_mod = parse(&pre_text)?;
        let post_mod = parse(&post_text)?;

        // Pre-patch functions live in old-side line numbers, post-patch ones
        // in new-side numbers; the inverted diff swaps the sides.
        let inverted = invert_diff(diff);
        let pre_hit: Vec<&FunctionDef> =
            pre_mod.functions.iter().filter(|f| touches_any(f, diff)).collect();
        let post_hit: Vec<&FunctionDef> =
            post_mod.functions.iter().filter(|f| touches_any(f, &inverted)).collect();

        // Keyed by name; the value keeps the earliest start line seen so the
        // output order is stable even for functions present on one side only.
        let mut names: BTreeMap<String, u32> = BTreeMap::new();
        for f in post_hit.iter().chain(pre_hit.iter()) {
            let entry = names.entry(f.name.clone()).or_insert(f.span.line);
            *entry = (*entry).min(f.span.line);
        }

        let mut ordered: Vec<(String, u32)> = names.into_iter().collect();
        ordered.sort_by_key(|(_, line)| *line);

        for (name, _) in ordered {
            let pre_source = slice_function(&pre_text, &pre_mod.functions, &name);
            let post_source = slice_function(&post_text, &post_mod.functions, &name);
            if pre_source != post_source {
                contexts.push(FunctionContext {
                    path: diff.path.clone(),
                    name,
                    pre_source,
                    post_source,
                });
            }
        }
    }
    Ok(contexts)
}

/// True when any of the diff's hunks lands inside the function's line range
/// on the *old* side of that diff.
fn touches_any(f: &FunctionDef, diff: &FileDiff) -> bool {
    diff.hunks.iter().any(|h| {
        let (start, end) = if h.old_len == 0 {
            // Pure insertion after old_start: it affects whichever function
            // spans the insertion point.
            (h.old_start, h.old_start + 1)
        } else {
            (h.old_start, h.old_start + h.old_len - 1)
        };
        start <= f.end_line && end >= f.span.line
    })
}

fn slice_function(text: &str, functions: &[FunctionDef], name: &str) -> String {
    let Some(f) = functions.iter().find(|f| f.name == name) else {
        return String::new();
    };
    let lines: Vec<&str> = text.lines().collect();
    let start = (f.span.line as usize).saturating_sub(1);
    let end = (f.end_line as usize).min(lines.len());
    let mut out = lines[start..end].join("\n");
    out.push('\n');
    out
}
