//! Few-shot material for the synthesis prompts: three worked examples, each
//! pairing a bug-fix diff with the pattern write-up, detection plan, and
//! finished checker that a good run should produce.

use crate::category::BugCategory;

#[derive(Clone, Copy, Debug)]
pub struct Exemplar {
    pub category: BugCategory,
    pub commit_message: &'static str,
    pub patch: &'static str,
    pub pattern: &'static str,
    pub plan: &'static str,
    pub checker: &'static str,
}

/// Skeleton embedded in the implementation prompt; the angle-bracket slots
/// are instructions to the model, not valid checker syntax.
pub const CHECKER_TEMPLATE: &str = r#"checker <Name_with_target_callee> {
    map <StateMap> { <Tag>, ... }
    uses alias_map;

    template <message_id> = "<one-line report message>";

    on <event> where <guard>, <guard> {
        <action>;
    }
}
"#;

static NPD: Exemplar = Exemplar {
    category: BugCategory::NullPointerDereference,
    commit_message: "bridge: check devm_kzalloc result before use\n\n\
devm_kzalloc can return NULL under memory pressure; bail out instead of\n\
dereferencing the unchecked pointer.",
    patch: r#"--- a/drivers/bridge.mc
+++ b/drivers/bridge.mc
@@ -1,5 +1,8 @@
 int bridge_probe(int n) {
     int* state = devm_kzalloc(n);
+    if (!state) {
+        return -12;
+    }
     *state = n;
     return 0;
 }
"#,
    pattern: "The function stores the result of the fallible allocator \
`devm_kzalloc` and dereferences it without first comparing it against NULL. \
The fix inserts an early return on the NULL branch before any use.",
    plan: "Track the region returned by `devm_kzalloc` in a state map as \
Unchecked. A branch condition that tests that pointer against NULL clears \
the mark on both outcomes. Any load or store through a region still marked \
Unchecked is a possible NULL dereference; propagate marks across pointer \
assignments so aliases stay covered.",
    checker: r#"checker Npd_devm_kzalloc {
    map PossibleNull { Unchecked }
    uses alias_map;

    template null_deref = "possible NULL dereference of unchecked devm_kzalloc result";

    on post_call where callee_is("devm_kzalloc") {
        set_state(PossibleNull, return_region, Unchecked);
    }

    on branch_condition where null_test_on(checked) {
        clear_state(PossibleNull, checked);
    }

    on location where state_is(PossibleNull, base_region, Unchecked) {
        report(null_deref, base_region);
    }

    on bind {
        propagate_alias(lhs, rhs);
    }
}
"#,
};

static UBI: Exemplar = Exemplar {
    category: BugCategory::UseBeforeInitialization,
    commit_message: "queue: zero the queue head before reading it\n\n\
kmalloc leaves the buffer uninitialized, so the first read of *q observed\n\
garbage. Switch to kzalloc.",
    patch: r#"--- a/drivers/queue.mc
+++ b/drivers/queue.mc
@@ -1,6 +1,6 @@
 int queue_setup(int n) {
-    int* q = kmalloc(n);
+    int* q = kzalloc(n);
     int head = *q;
     use_queue(head);
     return head;
 }
"#,
    pattern: "Memory obtained from `kmalloc` is read before anything is \
written to it. The fix swaps the allocator for its zeroing variant, so the \
first read sees initialized memory.",
    plan: "Mark the region returned by `kmalloc` as Uninit. A store through \
the region clears the mark; a load through a region still marked Uninit is \
a read of uninitialized memory. Propagate marks across pointer assignments.",
    checker: r#"checker Ubi_kmalloc {
    map MemInit { Uninit }
    uses alias_map;

    template uninit_read = "read of kmalloc memory before any write";

    on post_call where callee_is("kmalloc") {
        set_state(MemInit, return_region, Uninit);
    }

    on location where access_kind(store) {
        clear_state(MemInit, base_region);
    }

    on location where access_kind(load), state_is(MemInit, base_region, Uninit) {
        report(uninit_read, base_region);
    }

    on bind {
        propagate_alias(lhs, rhs);
    }
}
"#,
};

static DFREE: Exemplar = Exemplar {
    category: BugCategory::DoubleFree,
    commit_message: "ring: drop duplicate release_buf in teardown\n\n\
ring_teardown released the buffer twice when notify_done succeeded; the\n\
second release_buf corrupts the allocator's free list.",
    patch: r#"--- a/net/ring.mc
+++ b/net/ring.mc
@@ -1,6 +1,5 @@
 int ring_teardown(int* buf) {
     release_buf(buf);
     notify_done(0);
-    release_buf(buf);
     return 0;
 }
"#,
    pattern: "The same buffer reaches `release_buf` twice on one path with \
no reallocation in between. The fix deletes the redundant second release.",
    plan: "After a call to `release_buf`, tag the argument's whole alias \
class as Freed. A later call to `release_buf` whose argument is already \
tagged Freed is a double free; report it at the second call site. Propagate \
aliases across pointer assignments so the tag follows every name for the \
buffer.",
    checker: r#"checker Dfree_release_buf {
    map BufState { Freed }
    uses alias_map;

    template double_free = "second release_buf on an already-released buffer";

    on pre_call where callee_is("release_buf"), state_is(BufState, arg_region(0), Freed) {
        report(double_free, arg_region(0));
    }

    on post_call where callee_is("release_buf") {
        mark_all_aliases(BufState, arg_region(0), Freed);
    }

    on bind {
        propagate_alias(lhs, rhs);
    }
}
"#,
};

pub fn exemplars() -> &'static [Exemplar; 3] {
    static ALL: [Exemplar; 3] = [NPD, UBI, DFREE];
    &ALL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdsl::CompiledChecker;
    use crate::engine::{analyze_function, EngineBudget};
    use crate::minilang::parse_module;
    use crate::patch::{parse_patch, HunkLine};

    #[test]
    fn test_exemplar_checkers_compile() {
        use crate::engine::EventHooks;
        for ex in exemplars() {
            let checker = CompiledChecker::from_source(ex.checker)
                .unwrap_or_else(|d| panic!("{:?} exemplar: {:?}", ex.category, d));
            let prefix = match ex.category {
                BugCategory::NullPointerDereference => "Npd_",
                BugCategory::UseBeforeInitialization => "Ubi_",
                BugCategory::DoubleFree => "Dfree_",
                other => panic!("unexpected exemplar category {other:?}"),
            };
            assert!(checker.checker_name().starts_with(prefix));
        }
    }

    #[test]
    fn test_exemplar_patches_parse() {
        for ex in exemplars() {
            let (msg, diffs) = parse_patch(ex.patch).unwrap();
            assert!(msg.is_empty());
            assert_eq!(diffs.len(), 1);
        }
    }

    /// Each exemplar hunk spans its whole file, so the buggy and fixed
    /// program texts fall straight out of the hunk lines. The exemplar
    /// checker must flag the buggy version and stay quiet on the fix.
    #[test]
    fn test_exemplar_checkers_separate_buggy_from_fixed() {
        for ex in exemplars() {
            let (_, diffs) = parse_patch(ex.patch).unwrap();
            let mut buggy = String::new();
            let mut fixed = String::new();
            for line in &diffs[0].hunks[0].lines {
                match line {
                    HunkLine::Context(l) => {
                        buggy.push_str(l);
                        buggy.push('\n');
                        fixed.push_str(l);
                        fixed.push('\n');
                    }
                    HunkLine::Removed(l) => {
                        buggy.push_str(l);
                        buggy.push('\n');
                    }
                    HunkLine::Added(l) => {
                        fixed.push_str(l);
                        fixed.push('\n');
                    }
                }
            }
            let checker = CompiledChecker::from_source(ex.checker).unwrap();
            let budget = EngineBudget::default();
            let buggy_fn = &parse_module(&buggy).unwrap().functions[0];
            let fixed_fn = &parse_module(&fixed).unwrap().functions[0];
            let flagged = analyze_function(buggy_fn, "ex.mc", &checker, &budget).unwrap();
            let quiet = analyze_function(fixed_fn, "ex.mc", &checker, &budget).unwrap();
            assert!(
                !flagged.reports.is_empty(),
                "{:?} exemplar missed its own buggy shape",
                ex.category
            );
            assert!(
                quiet.reports.is_empty(),
                "{:?} exemplar flagged its own fix: {:?}",
                ex.category,
                quiet.reports
            );
        }
    }
}
