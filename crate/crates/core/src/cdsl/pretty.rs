use super::ast::*;
use crate::engine::AccessKind;

/// Prints a checker in canonical layout: declarations first, then templates,
/// then handlers, one blank line between sections and between handlers.
pub fn print_checker(def: &CheckerDef) -> String {
    let mut blocks: Vec<String> = Vec::new();
    let mut decls = Vec::new();
    for map in &def.maps {
        decls.push(format!("    map {} {{ {} }}", map.name, map.tags.join(", ")));
    }
    if def.uses_alias_map {
        decls.push("    uses alias_map;".to_string());
    }
    if !decls.is_empty() {
        blocks.push(decls.join("\n"));
    }
    let templates: Vec<String> = def
        .templates
        .iter()
        .map(|t| format!("    template {} = \"{}\";", t.name, escape(&t.text)))
        .collect();
    if !templates.is_empty() {
        blocks.push(templates.join("\n"));
    }
    for handler in &def.handlers {
        blocks.push(print_handler(handler));
    }
    format!("checker {} {{\n{}\n}}\n", def.name, blocks.join("\n\n"))
}

fn print_handler(handler: &Handler) -> String {
    let mut head = format!("    on {}", handler.event.keyword());
    if !handler.guards.is_empty() {
        let guards: Vec<String> = handler.guards.iter().map(print_guard).collect();
        head.push_str(" where ");
        head.push_str(&guards.join(", "));
    }
    head.push_str(" {\n");
    for action in &handler.actions {
        head.push_str("        ");
        head.push_str(&print_action(action));
        head.push('\n');
    }
    head.push_str("    }");
    head
}

fn print_guard(guard: &Guard) -> String {
    match guard {
        Guard::CalleeIs { name, .. } => format!("callee_is(\"{}\")", escape(name)),
        Guard::ArgCount { count, .. } => format!("arg_count({count})"),
        Guard::AccessKind { kind, .. } => match kind {
            AccessKind::Load => "access_kind(load)".to_string(),
            AccessKind::Store => "access_kind(store)".to_string(),
        },
        Guard::NullTestOn { var, .. } => format!("null_test_on({var})"),
        Guard::StateIs { map, region, tag, .. } => {
            format!("state_is({map}, {}, {tag})", print_region(region))
        }
    }
}

fn print_action(action: &Action) -> String {
    match action {
        Action::SetState { map, region, tag, .. } => {
            format!("set_state({map}, {}, {tag});", print_region(region))
        }
        Action::ClearState { map, region, .. } => {
            format!("clear_state({map}, {});", print_region(region))
        }
        Action::PropagateAlias { lhs, rhs, .. } => {
            format!("propagate_alias({}, {});", print_region(lhs), print_region(rhs))
        }
        Action::MarkAllAliases { map, region, tag, .. } => {
            format!("mark_all_aliases({map}, {}, {tag});", print_region(region))
        }
        Action::Report { template, region, .. } => {
            format!("report({template}, {});", print_region(region))
        }
    }
}

fn print_region(region: &RegionExpr) -> String {
    match region {
        RegionExpr::ArgRegion { index, .. } => format!("arg_region({index})"),
        RegionExpr::ReturnRegion { .. } => "return_region".to_string(),
        RegionExpr::BaseRegion { .. } => "base_region".to_string(),
        RegionExpr::Lhs { .. } => "lhs".to_string(),
        RegionExpr::Rhs { .. } => "rhs".to_string(),
        RegionExpr::Var { name, .. } => name.clone(),
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}
