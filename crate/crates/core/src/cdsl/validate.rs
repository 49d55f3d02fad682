use super::ast::*;
use super::Diagnostic;
use std::collections::BTreeSet;

/// Semantic checks over a parsed checker. Returns every problem found,
/// ordered by position, so a repair step can fix the first one and retry.
pub fn validate(def: &CheckerDef) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut map_names: BTreeSet<&str> = BTreeSet::new();
    for map in &def.maps {
        if !map_names.insert(&map.name) {
            diags.push(Diagnostic::new(
                "E-DUP-MAP",
                format!("map `{}` is declared twice", map.name),
                map.span,
            ));
        }
    }
    let template_names: BTreeSet<&str> = def.templates.iter().map(|t| t.name.as_str()).collect();
    let mut any_report = false;
    for handler in &def.handlers {
        if handler.actions.is_empty() {
            diags.push(Diagnostic::new(
                "E-EMPTY-ACTIONS",
                format!("`on {}` handler has no actions", handler.event.keyword()),
                handler.span,
            ));
        }
        let mut bound: BTreeSet<String> = BTreeSet::new();
        for guard in &handler.guards {
            check_guard(def, handler, guard, &mut bound, &mut diags);
        }
        for action in &handler.actions {
            match action {
                Action::SetState { map, region, tag, span } => {
                    check_map_tag(def, map, Some(tag), *span, &mut diags);
                    check_region(handler, region, &bound, &mut diags);
                }
                Action::ClearState { map, region, span } => {
                    check_map_tag(def, map, None, *span, &mut diags);
                    check_region(handler, region, &bound, &mut diags);
                }
                Action::PropagateAlias { lhs, rhs, span } => {
                    if !def.uses_alias_map {
                        diags.push(Diagnostic::new(
                            "E-ALIAS-UNDECLARED",
                            "`propagate_alias` requires `uses alias_map;`".to_string(),
                            *span,
                        ));
                    }
                    check_region(handler, lhs, &bound, &mut diags);
                    check_region(handler, rhs, &bound, &mut diags);
                }
                Action::MarkAllAliases { map, region, tag, span } => {
                    if !def.uses_alias_map {
                        diags.push(Diagnostic::new(
                            "E-ALIAS-UNDECLARED",
                            "`mark_all_aliases` requires `uses alias_map;`".to_string(),
                            *span,
                        ));
                    }
                    check_map_tag(def, map, Some(tag), *span, &mut diags);
                    check_region(handler, region, &bound, &mut diags);
                }
                Action::Report { template, region, span } => {
                    any_report = true;
                    if !template_names.contains(template.as_str()) {
                        diags.push(Diagnostic::new(
                            "E-UNDECLARED-TEMPLATE",
                            format!("template `{template}` is not declared"),
                            *span,
                        ));
                    }
                    check_region(handler, region, &bound, &mut diags);
                }
            }
        }
    }
    if !any_report {
        diags.push(Diagnostic::new(
            "E-NO-REPORT",
            format!("checker `{}` never reports anything", def.name),
            def.span,
        ));
    }
    diags.sort_by(|a, b| (a.span, &a.code).cmp(&(b.span, &b.code)));
    diags
}

fn bad_guard(name: &str, event: EventKind, span: crate::span::SourceSpan) -> Diagnostic {
    Diagnostic::new(
        "E-BAD-GUARD",
        format!("guard `{name}` is not available on `{}` events", event.keyword()),
        span,
    )
}

fn check_guard(
    def: &CheckerDef,
    handler: &Handler,
    guard: &Guard,
    bound: &mut BTreeSet<String>,
    diags: &mut Vec<Diagnostic>,
) {
    let event = handler.event;
    let on_call = matches!(event, EventKind::PreCall | EventKind::PostCall);
    match guard {
        Guard::CalleeIs { span, .. } => {
            if !on_call {
                diags.push(bad_guard("callee_is", event, *span));
            }
        }
        Guard::ArgCount { span, .. } => {
            if !on_call {
                diags.push(bad_guard("arg_count", event, *span));
            }
        }
        Guard::AccessKind { span, .. } => {
            if event != EventKind::Location {
                diags.push(bad_guard("access_kind", event, *span));
            }
        }
        Guard::NullTestOn { var, span } => {
            if event == EventKind::BranchCondition {
                bound.insert(var.clone());
            } else {
                diags.push(bad_guard("null_test_on", event, *span));
            }
        }
        Guard::StateIs { map, region, tag, span } => {
            check_map_tag(def, map, Some(tag), *span, diags);
            match region {
                RegionExpr::Var { name, .. } if !bound.contains(name) => {
                    if event == EventKind::EndFunction {
                        // Quantifier: the guard enumerates tagged regions and
                        // binds the variable to each in turn.
                        bound.insert(name.clone());
                    } else {
                        diags.push(Diagnostic::new(
                            "E-UNBOUND-VAR",
                            format!("variable `{name}` is not bound by any guard in this handler"),
                            region.span(),
                        ));
                        // Treat it as bound from here on so one mistake does
                        // not echo through every later use.
                        bound.insert(name.clone());
                    }
                }
                _ => check_region(handler, region, bound, diags),
            }
        }
    }
}

fn check_map_tag(
    def: &CheckerDef,
    map: &str,
    tag: Option<&str>,
    span: crate::span::SourceSpan,
    diags: &mut Vec<Diagnostic>,
) {
    let Some(decl) = def.maps.iter().find(|m| m.name == map) else {
        diags.push(Diagnostic::new(
            "E-UNDECLARED-MAP",
            format!("map `{map}` is not declared"),
            span,
        ));
        return;
    };
    if let Some(tag) = tag {
        if !decl.tags.iter().any(|t| t == tag) {
            diags.push(Diagnostic::new(
                "E-UNDECLARED-TAG",
                format!("tag `{tag}` is not declared in map `{map}`"),
                span,
            ));
        }
    }
}

fn bad_region(name: &str, event: EventKind, span: crate::span::SourceSpan) -> Diagnostic {
    Diagnostic::new(
        "E-BAD-REGION-EXPR",
        format!("`{name}` is not available on `{}` events", event.keyword()),
        span,
    )
}

fn check_region(
    handler: &Handler,
    region: &RegionExpr,
    bound: &BTreeSet<String>,
    diags: &mut Vec<Diagnostic>,
) {
    let event = handler.event;
    match region {
        RegionExpr::ArgRegion { .. } => {
            if !matches!(event, EventKind::PreCall | EventKind::PostCall) {
                diags.push(bad_region("arg_region", event, region.span()));
            }
        }
        RegionExpr::ReturnRegion { .. } => {
            if event != EventKind::PostCall {
                diags.push(bad_region("return_region", event, region.span()));
            }
        }
        RegionExpr::BaseRegion { .. } => {
            if event != EventKind::Location {
                diags.push(bad_region("base_region", event, region.span()));
            }
        }
        RegionExpr::Lhs { .. } => {
            if event != EventKind::Bind {
                diags.push(bad_region("lhs", event, region.span()));
            }
        }
        RegionExpr::Rhs { .. } => {
            if event != EventKind::Bind {
                diags.push(bad_region("rhs", event, region.span()));
            }
        }
        RegionExpr::Var { name, .. } => {
            if !bound.contains(name) {
                diags.push(Diagnostic::new(
                    "E-UNBOUND-VAR",
                    format!("variable `{name}` is not bound by any guard in this handler"),
                    region.span(),
                ));
            }
        }
    }
}
