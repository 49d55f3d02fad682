use super::{FileDiff, HunkLine};

/// Serializes diffs back to unified-diff text in the canonical form the
/// parser accepts: a `diff --git` line per file, explicit lengths in every
/// hunk header, and the section text preserved.
pub fn render_diff(diffs: &[FileDiff]) -> String {
    let mut out = String::new();
    for d in diffs {
        out.push_str(&format!("diff --git a/{0} b/{0}\n", d.path));
        out.push_str(&format!("--- a/{}\n", d.path));
        out.push_str(&format!("+++ b/{}\n", d.path));
        for h in &d.hunks {
            out.push_str(&format!(
                "@@ -{},{} +{},{} @@",
                h.old_start, h.old_len, h.new_start, h.new_len
            ));
            if !h.section.is_empty() {
                out.push(' ');
                out.push_str(&h.section);
            }
            out.push('\n');
            for line in &h.lines {
                match line {
                    HunkLine::Context(s) => out.push_str(&format!(" {s}\n")),
                    HunkLine::Removed(s) => out.push_str(&format!("-{s}\n")),
                    HunkLine::Added(s) => out.push_str(&format!("+{s}\n")),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_patch;
    use super::*;

    #[test]
    fn test_canonical_diff_round_trips_byte_for_byte() {
        let text = "\
diff --git a/x.mc b/x.mc
--- a/x.mc
+++ b/x.mc
@@ -1,2 +1,2 @@ void f() {
 keep
+new
-old
diff --git a/y.mc b/y.mc
--- a/y.mc
+++ b/y.mc
@@ -4,1 +4,1 @@
-p
+q
";
        let (_, diffs) = parse_patch(text).unwrap();
        assert_eq!(render_diff(&diffs), text);
    }
}
