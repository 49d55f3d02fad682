//! Interpreter that turns a validated checker definition into engine hooks.

use super::ast::*;
use super::parser::parse_checker;
use super::validate::validate;
use super::Diagnostic;
use crate::engine::{
    CheckerRuntimeError, EngineEvent, EventHooks, HookEffect, ProgramState, Region,
};
use std::collections::BTreeMap;

type Env = BTreeMap<String, Region>;

/// A parsed, validated checker ready to run against the engine.
#[derive(Clone, Debug)]
pub struct CompiledChecker {
    def: CheckerDef,
}

impl CompiledChecker {
    pub fn from_source(src: &str) -> Result<CompiledChecker, Vec<Diagnostic>> {
        let def = parse_checker(src).map_err(|d| vec![d])?;
        CompiledChecker::compile(def)
    }

    pub fn compile(def: CheckerDef) -> Result<CompiledChecker, Vec<Diagnostic>> {
        let diags = validate(&def);
        if diags.is_empty() {
            Ok(CompiledChecker { def })
        } else {
            Err(diags)
        }
    }

    pub fn definition(&self) -> &CheckerDef {
        &self.def
    }

    fn template_text(&self, name: &str, handler: &Handler) -> Result<String, CheckerRuntimeError> {
        self.def
            .templates
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.text.clone())
            .ok_or_else(|| runtime(handler, format!("template `{name}` vanished after validation")))
    }
}

fn runtime(handler: &Handler, reason: String) -> CheckerRuntimeError {
    CheckerRuntimeError { handler: handler.event.keyword().to_string(), reason }
}

fn event_kind(event: &EngineEvent) -> Option<EventKind> {
    match event {
        EngineEvent::PostCall { .. } => Some(EventKind::PostCall),
        EngineEvent::PreCall { .. } => Some(EventKind::PreCall),
        EngineEvent::BranchCondition { .. } => Some(EventKind::BranchCondition),
        EngineEvent::Location { .. } => Some(EventKind::Location),
        EngineEvent::Bind { .. } => Some(EventKind::Bind),
        EngineEvent::EndFunction { .. } => Some(EventKind::EndFunction),
        EngineEvent::DeadSymbols { .. } => None,
    }
}

impl EventHooks for CompiledChecker {
    fn checker_name(&self) -> &str {
        &self.def.name
    }

    fn on_event(
        &self,
        state: &mut ProgramState,
        event: &EngineEvent,
    ) -> Result<Vec<HookEffect>, CheckerRuntimeError> {
        let Some(kind) = event_kind(event) else {
            return Ok(Vec::new());
        };
        let mut effects = Vec::new();
        for handler in &self.def.handlers {
            if handler.event != kind {
                continue;
            }
            let mut envs: Vec<Env> = vec![Env::new()];
            for guard in &handler.guards {
                let mut next = Vec::new();
                for env in envs {
                    next.extend(eval_guard(handler, guard, event, state, env)?);
                }
                envs = next;
                if envs.is_empty() {
                    break;
                }
            }
            for env in &envs {
                for action in &handler.actions {
                    exec_action(self, handler, action, event, state, env, &mut effects)?;
                }
            }
        }
        Ok(effects)
    }
}

fn eval_guard(
    handler: &Handler,
    guard: &Guard,
    event: &EngineEvent,
    state: &ProgramState,
    env: Env,
) -> Result<Vec<Env>, CheckerRuntimeError> {
    let pass = |env: Env| Ok(vec![env]);
    let fail = || Ok(Vec::new());
    match guard {
        Guard::CalleeIs { name, .. } => match event {
            EngineEvent::PreCall { callee, .. } | EngineEvent::PostCall { callee, .. }
                if callee == name =>
            {
                pass(env)
            }
            _ => fail(),
        },
        Guard::ArgCount { count, .. } => match event {
            EngineEvent::PreCall { args, .. } | EngineEvent::PostCall { args, .. }
                if args.len() == *count =>
            {
                pass(env)
            }
            _ => fail(),
        },
        Guard::AccessKind { kind, .. } => match event {
            EngineEvent::Location { kind: actual, .. } if actual == kind => pass(env),
            _ => fail(),
        },
        Guard::NullTestOn { var, .. } => match event {
            EngineEvent::BranchCondition { null_test: Some(region), .. } => {
                let mut env = env;
                env.insert(var.clone(), region.clone());
                pass(env)
            }
            _ => fail(),
        },
        Guard::StateIs { map, region, tag, .. } => {
            if let RegionExpr::Var { name, .. } = region {
                if !env.contains_key(name) {
                    // Validation only lets an unbound variable through here on
                    // `end_function`: it quantifies over the tagged regions.
                    let mut out = Vec::new();
                    for (tagged, actual) in state.tagged_regions(map) {
                        if actual == tag {
                            let mut env = env.clone();
                            env.insert(name.clone(), tagged.clone());
                            out.push(env);
                        }
                    }
                    return Ok(out);
                }
            }
            match resolve_region(handler, region, event, &env)? {
                Some(r) if state.tag(map, &r) == Some(tag.as_str()) => pass(env),
                _ => fail(),
            }
        }
    }
}

fn exec_action(
    checker: &CompiledChecker,
    handler: &Handler,
    action: &Action,
    event: &EngineEvent,
    state: &mut ProgramState,
    env: &Env,
    effects: &mut Vec<HookEffect>,
) -> Result<(), CheckerRuntimeError> {
    match action {
        Action::SetState { map, region, tag, .. } | Action::MarkAllAliases { map, region, tag, .. } => {
            if let Some(r) = resolve_region(handler, region, event, env)? {
                state.set_tag(map, &r, tag);
                effects.push(HookEffect::Note {
                    region: r,
                    span: event.span(),
                    text: format!("state {tag} set in {map}"),
                });
            }
        }
        Action::ClearState { map, region, .. } => {
            if let Some(r) = resolve_region(handler, region, event, env)? {
                state.clear_tag(map, &r);
            }
        }
        Action::PropagateAlias { lhs, rhs, .. } => {
            let left = resolve_region(handler, lhs, event, env)?;
            let right = resolve_region(handler, rhs, event, env)?;
            if let (Some(a), Some(b)) = (left, right) {
                state.union(&a, &b);
            }
        }
        Action::Report { template, region, .. } => {
            let resolved = resolve_region(handler, region, event, env)?;
            let message = checker.template_text(template, handler)?;
            effects.push(HookEffect::Report { region: resolved, span: event.span(), message });
        }
    }
    Ok(())
}

/// Evaluates a region expression against the current event. `Ok(None)` means
/// the expression is well-formed but the value designates no region (a
/// constant argument, a non-pointer bind); actions then do nothing and guards
/// fail. Structural misuse — an argument index past the call's arity, an
/// expression foreign to the event — is the checker's bug and aborts.
fn resolve_region(
    handler: &Handler,
    expr: &RegionExpr,
    event: &EngineEvent,
    env: &Env,
) -> Result<Option<Region>, CheckerRuntimeError> {
    match expr {
        RegionExpr::ArgRegion { index, .. } => match event {
            EngineEvent::PreCall { args, .. } | EngineEvent::PostCall { args, .. } => {
                match args.get(*index) {
                    Some(arg) => Ok(arg.region.clone()),
                    None => Err(runtime(
                        handler,
                        format!(
                            "argument index {index} out of bounds for a call with {} arguments",
                            args.len()
                        ),
                    )),
                }
            }
            _ => Err(runtime(handler, "arg_region outside a call event".to_string())),
        },
        RegionExpr::ReturnRegion { .. } => match event {
            EngineEvent::PostCall { return_region, .. } => Ok(Some(return_region.clone())),
            _ => Err(runtime(handler, "return_region outside post_call".to_string())),
        },
        RegionExpr::BaseRegion { .. } => match event {
            EngineEvent::Location { region, .. } => Ok(Some(region.base().clone())),
            _ => Err(runtime(handler, "base_region outside location".to_string())),
        },
        RegionExpr::Lhs { .. } => match event {
            EngineEvent::Bind { lhs, .. } => Ok(Some(lhs.clone())),
            _ => Err(runtime(handler, "lhs outside bind".to_string())),
        },
        RegionExpr::Rhs { .. } => match event {
            EngineEvent::Bind { rhs, .. } => Ok(rhs.region()),
            _ => Err(runtime(handler, "rhs outside bind".to_string())),
        },
        RegionExpr::Var { name, .. } => match env.get(name) {
            Some(region) => Ok(Some(region.clone())),
            None => Err(runtime(handler, format!("variable `{name}` is not bound"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{analyze_function, EngineBudget};
    use crate::minilang::parse_module;

    const NPD_SRC: &str = r#"
checker Npd_alloc {
    map PossibleNull { Unchecked }
    uses alias_map;

    template null_deref = "possible NULL dereference of unchecked alloc result";

    on post_call where callee_is("alloc") {
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
"#;

    fn run(checker_src: &str, program: &str) -> crate::engine::Analysis {
        let checker = CompiledChecker::from_source(checker_src).unwrap();
        let module = parse_module(program).unwrap();
        analyze_function(&module.functions[0], "t.mc", &checker, &EngineBudget::default()).unwrap()
    }

    #[test]
    fn test_null_deref_checker_flags_buggy_shape() {
        let analysis = run(
            NPD_SRC,
            r#"
int probe(int n) {
    int* state = alloc(8);
    *state = n;
    return 0;
}
"#,
        );
        assert_eq!(analysis.reports.len(), 1);
        let report = &analysis.reports[0];
        assert_eq!(report.checker, "Npd_alloc");
        assert_eq!(report.span.line, 4);
        assert_eq!(report.message, "possible NULL dereference of unchecked alloc result");
        assert!(report.trace.iter().any(|e| e.note == "state Unchecked set in PossibleNull"));
    }

    #[test]
    fn test_null_deref_checker_accepts_patched_shape() {
        let analysis = run(
            NPD_SRC,
            r#"
int probe(int n) {
    int* state = alloc(8);
    if (!state) {
        return -12;
    }
    *state = n;
    return 0;
}
"#,
        );
        assert!(analysis.reports.is_empty());
    }

    #[test]
    fn test_store_clears_and_load_reports() {
        let src = r#"
checker Ubi_raw {
    map MemInit { Uninit }
    uses alias_map;

    template uninit_read = "read of uninitialized memory";

    on post_call where callee_is("raw_alloc") {
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
"#;
        let buggy = run(
            src,
            r#"
int read_first(int n) {
    int* buf = raw_alloc(16);
    int head = *buf;
    return head;
}
"#,
        );
        assert_eq!(buggy.reports.len(), 1);
        assert_eq!(buggy.reports[0].span.line, 4);
        let fixed = run(
            src,
            r#"
int read_first(int n) {
    int* buf = raw_alloc(16);
    *buf = 0;
    int head = *buf;
    return head;
}
"#,
        );
        assert!(fixed.reports.is_empty());
    }

    #[test]
    fn test_end_function_quantifier_reports_leak() {
        let src = r#"
checker Leak_open_res {
    map Acq { Open }

    template leak = "resource from open_res never released";

    on post_call where callee_is("open_res") {
        set_state(Acq, return_region, Open);
    }

    on pre_call where callee_is("close_res") {
        clear_state(Acq, arg_region(0));
    }

    on end_function where state_is(Acq, leaked, Open) {
        report(leak, leaked);
    }
}
"#;
        let analysis = run(
            src,
            r#"
int f(int n) {
    int* h = open_res(n);
    if (n == 0) {
        close_res(h);
    }
    return 0;
}
"#,
        );
        assert_eq!(analysis.reports.len(), 1);
        assert_eq!(analysis.reports[0].span.line, 8);
        assert!(analysis.reports[0]
            .trace
            .iter()
            .any(|e| e.note == "value obtained from call to open_res"));
    }

    #[test]
    fn test_arg_index_out_of_bounds_is_a_runtime_error() {
        let src = r#"
checker Broken {
    map M { A }
    template t = "msg";
    on post_call where callee_is("f") {
        set_state(M, arg_region(2), A);
        report(t, arg_region(2));
    }
}
"#;
        let checker = CompiledChecker::from_source(src).unwrap();
        let module = parse_module("int g(int n) { f(n); return 0; }").unwrap();
        let err =
            analyze_function(&module.functions[0], "t.mc", &checker, &EngineBudget::default())
                .unwrap_err();
        assert_eq!(err.handler, "post_call");
        assert!(err.reason.contains("argument index 2 out of bounds"));
    }

    #[test]
    fn test_compile_rejects_invalid_source() {
        let err = CompiledChecker::from_source("checker C { on bind { } }").unwrap_err();
        let codes: Vec<&str> = err.iter().map(|d| d.code.as_str()).collect();
        assert!(codes.contains(&"E-EMPTY-ACTIONS"));
        assert!(codes.contains(&"E-NO-REPORT"));
    }
}
