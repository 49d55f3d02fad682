use super::{FileDiff, Hunk, HunkLine, PatchError};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

/// Swaps the two sides of a diff, so that applying the result forward undoes
/// the original. Involutive: inverting twice gives the input back.
pub fn invert_diff(diff: &FileDiff) -> FileDiff {
    FileDiff {
        path: diff.path.clone(),
        hunks: diff
            .hunks
            .iter()
            .map(|h| Hunk {
                old_start: h.new_start,
                old_len: h.new_len,
                new_start: h.old_start,
                new_len: h.old_len,
                section: h.section.clone(),
                lines: h
                    .lines
                    .iter()
                    .map(|l| match l {
                        HunkLine::Context(s) => HunkLine::Context(s.clone()),
                        HunkLine::Removed(s) => HunkLine::Added(s.clone()),
                        HunkLine::Added(s) => HunkLine::Removed(s.clone()),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Applies one file's hunks to `source`. Context and removed lines must match
/// the source exactly; any disagreement is a [`PatchError::ContextMismatch`]
/// naming the offending hunk.
pub fn apply_patch(source: &str, diff: &FileDiff, direction: Direction) -> Result<String, PatchError> {
    let inverted;
    let diff = match direction {
        Direction::Forward => diff,
        Direction::Reverse => {
            inverted = invert_diff(diff);
            &inverted
        }
    };

    let src: Vec<&str> = source.lines().collect();
    let mut out: Vec<String> = Vec::with_capacity(src.len());
    let mut cursor = 0usize;

    for (hunk_index, hunk) in diff.hunks.iter().enumerate() {
        let mismatch = || PatchError::ContextMismatch { path: diff.path.clone(), hunk_index };
        // For a zero-length old side the hunk inserts *after* old_start.
        let start = if hunk.old_len == 0 {
            hunk.old_start as usize
        } else {
            (hunk.old_start as usize).saturating_sub(1)
        };
        if start < cursor || start > src.len() {
            return Err(mismatch());
        }
        out.extend(src[cursor..start].iter().map(|s| s.to_string()));
        let mut pos = start;
        for line in &hunk.lines {
            match line {
                HunkLine::Context(s) => {
                    if src.get(pos) != Some(&s.as_str()) {
                        return Err(mismatch());
                    }
                    out.push(s.clone());
                    pos += 1;
                }
                HunkLine::Removed(s) => {
                    if src.get(pos) != Some(&s.as_str()) {
                        return Err(mismatch());
                    }
                    pos += 1;
                }
                HunkLine::Added(s) => out.push(s.clone()),
            }
        }
        cursor = pos;
    }
    out.extend(src[cursor..].iter().map(|s| s.to_string()));

    let mut result = out.join("\n");
    if !result.is_empty() && (source.ends_with('\n') || source.is_empty()) {
        result.push('\n');
    }
    Ok(result)
}
