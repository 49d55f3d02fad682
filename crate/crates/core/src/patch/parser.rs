use super::{FileDiff, Hunk, HunkLine, PatchError};

/// Splits commit text into the message and its file diffs.
///
/// The message is everything before the first `diff --git` or `---` header.
/// Returns `MalformedDiff` for git extended headers (renames, deletions, new
/// files, binary patches), for `/dev/null` sides, and for hunks whose line
/// counts disagree with their `@@` header.
pub fn parse_patch(text: &str) -> Result<(String, Vec<FileDiff>), PatchError> {
    let lines: Vec<&str> = text.lines().collect();
    let diff_start = lines
        .iter()
        .position(|l| l.starts_with("diff --git ") || l.starts_with("--- "))
        .unwrap_or(lines.len());

    let message = lines[..diff_start].join("\n");
    let message = message.trim_end().to_string();

    let mut diffs = Vec::new();
    let mut i = diff_start;
    while i < lines.len() {
        let line = lines[i];
        let lineno = i + 1;
        if line.is_empty() {
            i += 1;
            continue;
        }
        if let Some(rest) = line.strip_prefix("diff --git ") {
            check_git_paths(rest, lineno)?;
            i += 1;
            continue;
        }
        if is_rejected_header(line) {
            return Err(PatchError::MalformedDiff {
                line: lineno,
                reason: format!("unsupported diff operation: `{line}`"),
            });
        }
        if line.starts_with("index ") {
            i += 1;
            continue;
        }
        if let Some(old) = line.strip_prefix("--- ") {
            let old_path = strip_side(old, "a/", lineno)?;
            i += 1;
            let new_line = lines.get(i).copied().unwrap_or("");
            let Some(new) = new_line.strip_prefix("+++ ") else {
                return Err(PatchError::MalformedDiff {
                    line: i + 1,
                    reason: "expected `+++` after `---`".into(),
                });
            };
            let new_path = strip_side(new, "b/", i + 1)?;
            if old_path != new_path {
                return Err(PatchError::MalformedDiff {
                    line: i + 1,
                    reason: format!("renames are not supported (`{old_path}` vs `{new_path}`)"),
                });
            }
            i += 1;
            let mut hunks = Vec::new();
            while i < lines.len() && lines[i].starts_with("@@") {
                let (hunk, next) = parse_hunk(&lines, i)?;
                hunks.push(hunk);
                i = next;
            }
            if hunks.is_empty() {
                return Err(PatchError::MalformedDiff {
                    line: i + 1,
                    reason: format!("no hunks for `{new_path}`"),
                });
            }
            validate_hunk_order(&hunks, lineno)?;
            diffs.push(FileDiff { path: new_path, hunks });
            continue;
        }
        return Err(PatchError::MalformedDiff {
            line: lineno,
            reason: format!("unexpected line in diff: `{line}`"),
        });
    }

    Ok((message, diffs))
}

fn check_git_paths(rest: &str, lineno: usize) -> Result<(), PatchError> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    if parts.len() == 2 {
        let a = parts[0].strip_prefix("a/").unwrap_or(parts[0]);
        let b = parts[1].strip_prefix("b/").unwrap_or(parts[1]);
        if a != b {
            return Err(PatchError::MalformedDiff {
                line: lineno,
                reason: format!("renames are not supported (`{a}` vs `{b}`)"),
            });
        }
    }
    Ok(())
}

fn is_rejected_header(line: &str) -> bool {
    const REJECTED: [&str; 8] = [
        "new file mode",
        "deleted file mode",
        "rename from",
        "rename to",
        "copy from",
        "copy to",
        "similarity index",
        "Binary files",
    ];
    REJECTED.iter().any(|p| line.starts_with(p))
}

fn strip_side(path: &str, prefix: &str, lineno: usize) -> Result<String, PatchError> {
    let path = path.trim_end();
    if path == "/dev/null" {
        return Err(PatchError::MalformedDiff {
            line: lineno,
            reason: "file creation/deletion is not supported".into(),
        });
    }
    Ok(path.strip_prefix(prefix).unwrap_or(path).to_string())
}

fn parse_hunk(lines: &[&str], start: usize) -> Result<(Hunk, usize), PatchError> {
    let header = lines[start];
    let lineno = start + 1;
    let malformed = |reason: String| PatchError::MalformedDiff { line: lineno, reason };

    let rest = header
        .strip_prefix("@@ -")
        .ok_or_else(|| malformed(format!("bad hunk header `{header}`")))?;
    let (ranges, section) = rest
        .split_once(" @@")
        .ok_or_else(|| malformed(format!("bad hunk header `{header}`")))?;
    let (old_part, new_part) = ranges
        .split_once(" +")
        .ok_or_else(|| malformed(format!("bad hunk header `{header}`")))?;
    let (old_start, old_len) = parse_range(old_part).ok_or_else(|| {
        malformed(format!("bad old range `{old_part}` in hunk header"))
    })?;
    let (new_start, new_len) = parse_range(new_part).ok_or_else(|| {
        malformed(format!("bad new range `{new_part}` in hunk header"))
    })?;
    let section = section.strip_prefix(' ').unwrap_or(section).to_string();

    let mut body = Vec::new();
    let (mut old_seen, mut new_seen) = (0u32, 0u32);
    let mut i = start + 1;
    while (old_seen < old_len || new_seen < new_len) && i < lines.len() {
        let l = lines[i];
        if l.starts_with('\\') {
            // "\ No newline at end of file" carries no content.
            i += 1;
            continue;
        }
        let (marker, content) = if l.is_empty() {
            (' ', "")
        } else {
            let mut chars = l.chars();
            (chars.next().unwrap(), chars.as_str())
        };
        match marker {
            ' ' => {
                body.push(HunkLine::Context(content.to_string()));
                old_seen += 1;
                new_seen += 1;
            }
            '-' => {
                body.push(HunkLine::Removed(content.to_string()));
                old_seen += 1;
            }
            '+' => {
                body.push(HunkLine::Added(content.to_string()));
                new_seen += 1;
            }
            _ => {
                return Err(PatchError::MalformedDiff {
                    line: i + 1,
                    reason: format!("unexpected line inside hunk: `{l}`"),
                })
            }
        }
        if old_seen > old_len || new_seen > new_len {
            return Err(malformed(format!(
                "hunk body exceeds header ranges (-{old_start},{old_len} +{new_start},{new_len})"
            )));
        }
        i += 1;
    }
    if old_seen != old_len || new_seen != new_len {
        return Err(malformed(format!(
            "hunk body shorter than header ranges (-{old_start},{old_len} +{new_start},{new_len})"
        )));
    }
    // A trailing "\ No newline" marker belongs to this hunk.
    if i < lines.len() && lines[i].starts_with('\\') {
        i += 1;
    }
    Ok((
        Hunk { old_start, old_len, new_start, new_len, section, lines: body },
        i,
    ))
}

fn parse_range(s: &str) -> Option<(u32, u32)> {
    match s.split_once(',') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

fn validate_hunk_order(hunks: &[Hunk], lineno: usize) -> Result<(), PatchError> {
    for pair in hunks.windows(2) {
        let prev_end = pair[0].old_start + pair[0].old_len.max(1);
        if pair[1].old_start < prev_end {
            return Err(PatchError::MalformedDiff {
                line: lineno,
                reason: format!(
                    "hunks overlap or are out of order (old lines {} and {})",
                    pair[0].old_start, pair[1].old_start
                ),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const NULL_CHECK_PATCH: &str = "\
net: fix missing NULL check on probe buffer

The allocation can fail under memory pressure; bail out instead of
dereferencing a NULL pointer a line later.

diff --git a/drivers/net_probe.mc b/drivers/net_probe.mc
--- a/drivers/net_probe.mc
+++ b/drivers/net_probe.mc
@@ -2,3 +2,5 @@ int net_probe(int id) {
     int* ring = devm_kzalloc(64);
+    if (!ring)
+        return -1;
     *ring = 0;
     return 0;
";

    #[test]
    fn test_parse_null_check_patch() {
        let (message, diffs) = parse_patch(NULL_CHECK_PATCH).unwrap();
        assert!(message.starts_with("net: fix missing NULL check"));
        assert!(message.ends_with("a line later."));
        assert_eq!(diffs.len(), 1);
        assert_eq!(diffs[0].path, "drivers/net_probe.mc");
        assert_eq!(diffs[0].hunks.len(), 1);
        let h = &diffs[0].hunks[0];
        assert_eq!((h.old_start, h.old_len, h.new_start, h.new_len), (2, 3, 2, 5));
        assert_eq!(h.section, "int net_probe(int id) {");
        let added = h.lines.iter().filter(|l| matches!(l, HunkLine::Added(_))).count();
        let removed = h.lines.iter().filter(|l| matches!(l, HunkLine::Removed(_))).count();
        assert_eq!((added, removed), (2, 0));
    }

    #[test]
    fn test_parse_two_files_multiple_hunks() {
        let text = "\
--- a/x.mc
+++ b/x.mc
@@ -1,2 +1,2 @@
-old
+new
 keep
@@ -9,1 +9,2 @@
 tail
+extra
--- a/y.mc
+++ b/y.mc
@@ -3 +3 @@
-gone
+here
";
        let (message, diffs) = parse_patch(text).unwrap();
        assert_eq!(message, "");
        assert_eq!(diffs.len(), 2);
        assert_eq!(diffs[0].hunks.len(), 2);
        // Lengths default to 1 when the header omits them.
        assert_eq!(diffs[1].hunks[0].old_len, 1);
    }

    #[test]
    fn test_rename_rejected() {
        let text = "--- a/old.mc\n+++ b/new.mc\n@@ -1,1 +1,1 @@\n-x\n+y\n";
        let err = parse_patch(text).unwrap_err();
        assert!(err.to_string().contains("renames are not supported"));
    }

    #[test]
    fn test_extended_headers_rejected() {
        let text = "diff --git a/f.mc b/f.mc\ndeleted file mode 100644\n--- a/f.mc\n+++ b/f.mc\n";
        let err = parse_patch(text).unwrap_err();
        match err {
            PatchError::MalformedDiff { line, ref reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("unsupported diff operation"));
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn test_dev_null_rejected() {
        let text = "--- /dev/null\n+++ b/f.mc\n@@ -0,0 +1,1 @@\n+x\n";
        assert!(parse_patch(text).is_err());
    }

    #[test]
    fn test_count_mismatch_rejected() {
        let text = "--- a/f.mc\n+++ b/f.mc\n@@ -1,3 +1,3 @@\n keep\n-x\n+y\n";
        let err = parse_patch(text).unwrap_err();
        assert!(err.to_string().contains("shorter than header ranges"), "{err}");
    }

    #[test]
    fn test_overlapping_hunks_rejected() {
        let text = "\
--- a/f.mc
+++ b/f.mc
@@ -5,3 +5,3 @@
 a
-b
+c
 d
@@ -6,1 +6,1 @@
-z
+w
";
        let err = parse_patch(text).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }
}
