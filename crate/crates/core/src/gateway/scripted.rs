//! The scripted provider: deterministic, rule-based answers for every role,
//! so the full pipeline runs hermetically. The rules are narrow on purpose —
//! they recognize the bug-fix shapes the worked examples cover and answer
//! the way a competent model following the prompts would.

use super::{parse_front_matter, CompletionRequest, GatewayError, LlmProvider, Role};
use crate::category::BugCategory;
use crate::cdsl::exemplars::{exemplars, Exemplar};
use crate::gateway::prompt::exemplar_target;
use regex::Regex;
use std::sync::Mutex;

/// How the scripted refiner behaves; the non-default modes exist so tests
/// can exercise refinement's failure paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RefinerMode {
    /// Add a pre-call guard that clears tracked state for values passed to
    /// the vetting helpers named in the false-positive cases.
    #[default]
    Guard,
    /// Strip every report action (the refined checker stops compiling).
    DeleteReport,
    /// Return the checker unchanged (the false positives survive).
    Identity,
    /// Retarget every callee guard at a function nothing calls: the false
    /// positives vanish, but so does the detection the checker validated on.
    Silence,
}

pub struct ScriptedProvider {
    /// While positive, implementer and repairer outputs come out truncated;
    /// decremented per output. Models syntax trouble that repair attempts
    /// only eventually (or never) overcome.
    faults_remaining: Mutex<u32>,
    refiner_mode: RefinerMode,
}

impl ScriptedProvider {
    pub fn new() -> ScriptedProvider {
        ScriptedProvider { faults_remaining: Mutex::new(0), refiner_mode: RefinerMode::Guard }
    }

    /// The first `count` implementer/repairer outputs are emitted with the
    /// final `}` missing.
    pub fn with_faults(count: u32) -> ScriptedProvider {
        ScriptedProvider { faults_remaining: Mutex::new(count), refiner_mode: RefinerMode::Guard }
    }

    pub fn with_refiner_mode(mode: RefinerMode) -> ScriptedProvider {
        ScriptedProvider { faults_remaining: Mutex::new(0), refiner_mode: mode }
    }

    fn consume_fault(&self) -> bool {
        let mut left = self.faults_remaining.lock().expect("fault counter poisoned");
        if *left > 0 {
            *left -= 1;
            true
        } else {
            false
        }
    }
}

impl Default for ScriptedProvider {
    fn default() -> Self {
        ScriptedProvider::new()
    }
}

impl LlmProvider for ScriptedProvider {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let get = |key: &str| request.inputs.get(key).map(String::as_str).unwrap_or("");
        Ok(match request.bundle.role {
            Role::PatternAnalyst => analyze_pattern(get("patch")),
            Role::Planner => plan(get("pattern")),
            Role::Implementer => {
                let source = implement(get("plan"));
                if self.consume_fault() {
                    truncate_final_brace(&source)
                } else {
                    source
                }
            }
            Role::SyntaxRepairer => {
                if self.consume_fault() {
                    get("checker").to_string()
                } else {
                    repair(get("checker"), get("diagnostics"))
                }
            }
            Role::TriageAnalyst => triage(get("report")),
            Role::Refiner => refine(get("checker"), get("fp_cases"), self.refiner_mode),
        })
    }
}

fn exemplar_for(category: BugCategory) -> &'static Exemplar {
    exemplars()
        .iter()
        .find(|ex| ex.category == category)
        .expect("worked examples cover this category")
}

/// Rewrites a worked example's text onto a new target function. Renames the
/// checker too, since the example names embed their callee.
fn retarget(text: &str, category: BugCategory, target: &str) -> String {
    text.replace(exemplar_target(exemplar_for(category)), target)
}

const UNSUPPORTED: &str =
    "category: unsupported\ntarget: none\n\nNo recognized bug-fix shape in this patch.";

fn analyze_pattern(patch: &str) -> String {
    let mut added: Vec<&str> = Vec::new();
    let mut removed: Vec<&str> = Vec::new();
    let mut context: Vec<&str> = Vec::new();
    for line in patch.lines() {
        if line.starts_with("+++") || line.starts_with("---") {
            continue;
        }
        if let Some(rest) = line.strip_prefix('+') {
            added.push(rest);
        } else if let Some(rest) = line.strip_prefix('-') {
            removed.push(rest);
        } else if let Some(rest) = line.strip_prefix(' ') {
            context.push(rest);
        }
    }
    let pre_image: Vec<&str> = context.iter().chain(removed.iter()).copied().collect();

    let answer = |category: BugCategory, target: &str| {
        let ex = exemplar_for(category);
        format!(
            "category: {}\ntarget: {}\n\n{}",
            category.label(),
            target,
            retarget(ex.pattern, category, target)
        )
    };

    // A fix that adds a NULL test on a value some call produced.
    let null_test = Regex::new(r"^\s*if \(!(\w+)\)").unwrap();
    for line in &added {
        if let Some(caps) = null_test.captures(line) {
            if let Some(callee) = assigning_callee(&pre_image, &caps[1]) {
                return answer(BugCategory::NullPointerDereference, &callee);
            }
        }
    }

    // A fix that swaps an allocator for its zeroing variant.
    if removed.iter().any(|l| l.contains("kmalloc("))
        && added.iter().any(|l| l.contains("kzalloc("))
    {
        return answer(BugCategory::UseBeforeInitialization, "kmalloc");
    }

    // A fix that stores a constant through a pointer before its first read.
    let init_store = Regex::new(r"^\s*\*(\w+) = -?\d+;").unwrap();
    for line in &added {
        if let Some(caps) = init_store.captures(line) {
            if let Some(callee) = assigning_callee(&pre_image, &caps[1]) {
                return answer(BugCategory::UseBeforeInitialization, &callee);
            }
        }
    }

    // A fix that deletes a release call that also happens earlier.
    let bare_call = Regex::new(r"^\s*(\w+)\((\w+)\);\s*$").unwrap();
    for line in &removed {
        if let Some(caps) = bare_call.captures(line) {
            let stmt = line.trim();
            if context.iter().any(|c| c.trim() == stmt) {
                return answer(BugCategory::DoubleFree, &caps[1]);
            }
        }
    }

    UNSUPPORTED.to_string()
}

/// Finds `var = callee(...)` in the buggy version of the touched code.
fn assigning_callee(pre_image: &[&str], var: &str) -> Option<String> {
    let pattern = Regex::new(&format!(r"\b{}\s*=\s*(\w+)\(", regex::escape(var))).unwrap();
    pre_image.iter().find_map(|line| pattern.captures(line).map(|c| c[1].to_string()))
}

fn plan(pattern: &str) -> String {
    let fm = parse_front_matter(pattern);
    let (Some(category), Some(target)) = (fm.get("category"), fm.get("target")) else {
        return UNSUPPORTED.to_string();
    };
    let Ok(category) = category.parse::<BugCategory>() else {
        return UNSUPPORTED.to_string();
    };
    let ex = exemplar_for(category);
    format!(
        "category: {}\ntarget: {}\n\n{}",
        category.label(),
        target,
        retarget(ex.plan, category, target)
    )
}

fn implement(plan: &str) -> String {
    let fm = parse_front_matter(plan);
    let (Some(category), Some(target)) = (fm.get("category"), fm.get("target")) else {
        return "checker Unplanned {\n".to_string();
    };
    let Ok(category) = category.parse::<BugCategory>() else {
        return "checker Unplanned {\n".to_string();
    };
    retarget(exemplar_for(category).checker, category, target)
}

fn truncate_final_brace(source: &str) -> String {
    match source.trim_end().strip_suffix('}') {
        Some(rest) => rest.trim_end().to_string() + "\n",
        None => source.to_string(),
    }
}

fn repair(checker: &str, diagnostics: &str) -> String {
    let first = diagnostics.lines().next().unwrap_or("");
    if first.starts_with("E-PARSE") && first.contains("end of input") {
        let mut fixed = checker.trim_end().to_string();
        fixed.push_str("\n}\n");
        return fixed;
    }
    if first.starts_with("E-UNDECLARED-MAP") {
        let named = Regex::new(r"map `(\w+)`").unwrap();
        let declared = Regex::new(r"map\s+(\w+)\s*\{").unwrap();
        if let (Some(bad), Some(good)) = (
            named.captures(first).map(|c| c[1].to_string()),
            declared.captures(checker).map(|c| c[1].to_string()),
        ) {
            let word = Regex::new(&format!(r"\b{}\b", regex::escape(&bad))).unwrap();
            return word.replace_all(checker, good.as_str()).into_owned();
        }
    }
    checker.to_string()
}

/// Names that read as vetting helpers; a value that passed through one
/// before the flagged use was checked, whatever the state map thinks.
fn vetting_call(line: &str) -> bool {
    Regex::new(r"\b\w*(validate|verify|check|assert)\w*\s*\(").unwrap().is_match(line)
}

fn triage(report: &str) -> String {
    let source_lines: Vec<&str> = report
        .lines()
        .skip_while(|l| !l.starts_with("relevant source:"))
        .skip(1)
        .collect();
    let before_flagged = source_lines.iter().rev().skip(1);
    for line in before_flagged {
        if vetting_call(line) {
            return "verdict: not_a_bug\n\nThe value passes through a vetting helper before \
                    the flagged use, so the checker's state is stale."
                .to_string();
        }
        if report.contains("before any write") && line.trim_start().starts_with('*') && line.contains(" = ") {
            return "verdict: not_a_bug\n\nThe memory is written on this path before the \
                    flagged read."
                .to_string();
        }
    }
    "verdict: bug\n\nNothing on the path vets or initializes the value before the flagged use."
        .to_string()
}

fn refine(checker: &str, fp_cases: &str, mode: RefinerMode) -> String {
    match mode {
        RefinerMode::Identity => checker.to_string(),
        RefinerMode::Silence => Regex::new(r#"callee_is\("\w+"\)"#)
            .unwrap()
            .replace_all(checker, "callee_is(\"__nothing_calls_this__\")")
            .into_owned(),
        RefinerMode::DeleteReport => checker
            .lines()
            .filter(|l| !l.trim_start().starts_with("report("))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n",
        RefinerMode::Guard => {
            let helper = Regex::new(r"\b(\w*(?:validate|verify|check|assert)\w*)\s*\(").unwrap();
            let mut helpers: Vec<String> =
                helper.captures_iter(fp_cases).map(|c| c[1].to_string()).collect();
            helpers.sort();
            helpers.dedup();
            let map = Regex::new(r"map\s+(\w+)\s*\{")
                .unwrap()
                .captures(checker)
                .map(|c| c[1].to_string());
            let (Some(map), false) = (map, helpers.is_empty()) else {
                return checker.to_string();
            };
            let body = checker.trim_end().strip_suffix('}').unwrap_or(checker).trim_end();
            let mut out = body.to_string();
            for name in helpers {
                out.push_str(&format!(
                    "\n\n    on pre_call where callee_is(\"{name}\") {{\n        clear_state({map}, arg_region(0));\n    }}"
                ));
            }
            out.push_str("\n}\n");
            out
        }
    }
}
