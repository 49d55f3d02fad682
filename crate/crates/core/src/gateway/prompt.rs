//! Prompt rendering. Each role gets fixed instructions, worked examples
//! where they help, and the request's inputs as named sections. The
//! structured `key: value` header conventions in the instructions are what
//! lets the pipeline parse responses from any provider.

use super::{inputs_digest, PromptBundle, Role, RoleInputs};
use crate::cdsl::exemplars::{exemplars, CHECKER_TEMPLATE};
use crate::cdsl::catalog_markdown;

pub fn render_prompt(role: Role, inputs: &RoleInputs) -> PromptBundle {
    let mut text = String::new();
    text.push_str(&format!("## role\n{role}\n\n"));
    text.push_str("## instructions\n");
    text.push_str(instructions(role));
    text.push('\n');
    let examples = examples(role);
    if !examples.is_empty() {
        text.push_str("\n## examples\n");
        text.push_str(&examples);
    }
    for (key, value) in inputs {
        text.push_str(&format!("\n## input: {key}\n"));
        text.push_str(value);
        if !value.ends_with('\n') {
            text.push('\n');
        }
    }
    PromptBundle { role, rendered_text: text, inputs_digest: inputs_digest(role, inputs) }
}

fn instructions(role: Role) -> &'static str {
    match role {
        Role::PatternAnalyst => {
            "Study the bug-fix commit below and describe the bug pattern it removes.\n\
             Start your answer with a header block:\n\
             category: <one of the known category labels, or `unsupported`>\n\
             target: <the function whose use the bug centers on>\n\
             Then a blank line and a short prose description of the pattern."
        }
        Role::Planner => {
            "Turn the pattern analysis below into a concrete detection plan for a\n\
             path-sensitive checker: what state to track, which events set, clear,\n\
             and report it. Keep the `category:` and `target:` header block from\n\
             the analysis, then a blank line, then the plan."
        }
        Role::Implementer => {
            "Write a checker implementing the plan below. Answer with checker\n\
             source only, no fences, no commentary. Follow the skeleton and use\n\
             only the built-ins in the table."
        }
        Role::SyntaxRepairer => {
            "The checker below fails to compile with the listed diagnostics. Fix\n\
             the first diagnostic with the smallest possible edit and answer with\n\
             the complete corrected source only."
        }
        Role::TriageAnalyst => {
            "Decide whether the report below is a real bug or a false positive.\n\
             Consider the relevant source lines: a value vetted by a helper before\n\
             the flagged use, or initialized on every path, is not a bug. Start\n\
             your answer with `verdict: bug` or `verdict: not_a_bug`, then a blank\n\
             line and one sentence of justification."
        }
        Role::Refiner => {
            "The checker below produced the false positives listed. Refine it so\n\
             those exact cases go quiet while true positives keep firing — for\n\
             example, treat a value passed to a vetting helper as checked. Answer\n\
             with the complete refined checker source only."
        }
    }
}

fn examples(role: Role) -> String {
    let mut out = String::new();
    match role {
        Role::PatternAnalyst => {
            for ex in exemplars() {
                out.push_str(&format!(
                    "### commit\n{}\n\n{}\n### analysis\ncategory: {}\ntarget: {}\n\n{}\n\n",
                    ex.commit_message,
                    ex.patch,
                    ex.category.label(),
                    exemplar_target(ex),
                    ex.pattern,
                ));
            }
        }
        Role::Planner => {
            for ex in exemplars() {
                out.push_str(&format!(
                    "### analysis\ncategory: {}\ntarget: {}\n\n{}\n\n### plan\n{}\n\n",
                    ex.category.label(),
                    exemplar_target(ex),
                    ex.pattern,
                    ex.plan,
                ));
            }
        }
        Role::Implementer => {
            out.push_str("### skeleton\n");
            out.push_str(CHECKER_TEMPLATE);
            out.push_str("\n### built-ins\n");
            out.push_str(&catalog_markdown());
            out.push('\n');
            for ex in exemplars() {
                out.push_str(&format!("### plan\n{}\n\n### checker\n{}\n", ex.plan, ex.checker));
            }
        }
        Role::SyntaxRepairer | Role::TriageAnalyst | Role::Refiner => {}
    }
    out
}

/// The callee each worked example centers on; also the substring scripted
/// synthesis rewrites when adapting an example to a new target.
pub(super) fn exemplar_target(ex: &crate::cdsl::exemplars::Exemplar) -> &'static str {
    use crate::category::BugCategory;
    match ex.category {
        BugCategory::NullPointerDereference => "devm_kzalloc",
        BugCategory::UseBeforeInitialization => "kmalloc",
        BugCategory::DoubleFree => "release_buf",
        _ => unreachable!("examples cover exactly three categories"),
    }
}
