//! The checker definition language: a small declarative notation for
//! path-sensitive bug detectors.
//!
//! A checker declares state maps, an optional alias map, report templates,
//! and event handlers:
//!
//! ```text
//! checker Npd_devm_kzalloc {
//!     map PossibleNull { Unchecked }
//!     uses alias_map;
//!
//!     template null_deref = "possible NULL dereference";
//!
//!     on post_call where callee_is("devm_kzalloc") {
//!         set_state(PossibleNull, return_region, Unchecked);
//!     }
//!     on branch_condition where null_test_on(p) {
//!         clear_state(PossibleNull, p);
//!     }
//!     on location where state_is(PossibleNull, base_region, Unchecked) {
//!         report(null_deref, base_region);
//!     }
//!     on bind {
//!         propagate_alias(lhs, rhs);
//!     }
//! }
//! ```
//!
//! Sources pass through [`parse_checker`], then [`validate`]; a clean
//! definition compiles to a [`CompiledChecker`], which plugs into the engine
//! as its event hooks. Problems at either stage surface as [`Diagnostic`]s
//! with stable `E-` codes so automated repair can key off them.

mod ast;
mod catalog;
pub mod exemplars;
mod hooks;
mod lexer;
mod parser;
mod pretty;
mod validate;

pub use ast::{
    Action, CheckerDef, EventKind, Guard, Handler, MapDecl, RegionExpr, TemplateDecl,
};
pub use catalog::{builtin_catalog, catalog_markdown, BuiltinDoc};
pub use hooks::CompiledChecker;
pub use parser::parse_checker;
pub use pretty::print_checker;
pub use validate::validate;

use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A parse- or validation-stage problem, carrying a stable machine-readable
/// code alongside the human message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn new(code: &str, message: impl Into<String>, span: SourceSpan) -> Diagnostic {
        Diagnostic { code: code.to_string(), message: message.into(), span }
    }

    pub fn parse(message: impl Into<String>, span: SourceSpan) -> Diagnostic {
        Diagnostic::new("E-PARSE", message, span)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} at {}", self.code, self.message, self.span)
    }
}

/// Renders diagnostics one per line, the form stored in attempt artifacts
/// and fed back to the repair role.
pub fn render_diagnostics(diags: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diags {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}
