//! Events the explorer publishes to checker hooks.
//!
//! The engine walks each path and narrates what the program does: calls,
//! branches, memory accesses, bindings, and scope ends. A checker subscribes
//! by implementing [`EventHooks`]; its only way to influence the run is
//! through the mutable [`ProgramState`] it receives and the effects it
//! returns.

use super::region::{Region, SymbolicValue};
use super::state::ProgramState;
use crate::minilang::Cond;
use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessKind {
    Load,
    Store,
}

impl AccessKind {
    pub fn label(self) -> &'static str {
        match self {
            AccessKind::Load => "load",
            AccessKind::Store => "store",
        }
    }
}

/// One evaluated call argument: its value, the region that value designates
/// (if any), and where the argument was written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgView {
    pub value: SymbolicValue,
    pub region: Option<Region>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EngineEvent {
    /// About to enter an opaque call; arguments are already evaluated.
    PreCall { callee: String, args: Vec<ArgView>, span: SourceSpan },
    /// Returned from an opaque call. `return_region` is the memory the fresh
    /// return symbol points at.
    PostCall {
        callee: String,
        args: Vec<ArgView>,
        return_value: SymbolicValue,
        return_region: Region,
        span: SourceSpan,
    },
    /// A condition is about to fork the path. Fired once, before both
    /// successors, so state changes apply to each. `null_test` names the
    /// region whose pointer is being compared against NULL, when the
    /// condition has that shape.
    BranchCondition { cond: Cond, null_test: Option<Region>, span: SourceSpan },
    /// A memory access through a pointer (derefs and field accesses; plain
    /// variable reads and writes do not come through here).
    Location { kind: AccessKind, region: Region, span: SourceSpan },
    /// A value was stored into a region (variable assignment or the write
    /// half of a pointer store, after its `Location`).
    Bind { lhs: Region, rhs: SymbolicValue, span: SourceSpan },
    /// The named regions went out of scope.
    DeadSymbols { regions: Vec<Region>, span: SourceSpan },
    /// The path reached the end of the function.
    EndFunction { span: SourceSpan },
}

impl EngineEvent {
    pub fn span(&self) -> SourceSpan {
        match self {
            EngineEvent::PreCall { span, .. }
            | EngineEvent::PostCall { span, .. }
            | EngineEvent::BranchCondition { span, .. }
            | EngineEvent::Location { span, .. }
            | EngineEvent::Bind { span, .. }
            | EngineEvent::DeadSymbols { span, .. }
            | EngineEvent::EndFunction { span } => *span,
        }
    }
}

/// A checker crashed while handling an event. This aborts the whole analysis
/// of the current function; it is the checker's bug, not the program's.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("checker runtime error in `{handler}` handler: {reason}")]
pub struct CheckerRuntimeError {
    pub handler: String,
    pub reason: String,
}

/// What a hook wants done after seeing an event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HookEffect {
    /// Remember a step for later report traces, attached to a region so only
    /// notes about the reported value end up in its trace.
    Note { region: Region, span: SourceSpan, text: String },
    /// Emit a diagnostic at `span`. `region` scopes the trace to notes about
    /// the same alias class; reports without a region get no trace prefix.
    Report { region: Option<Region>, span: SourceSpan, message: String },
}

pub trait EventHooks {
    fn checker_name(&self) -> &str;
    fn on_event(
        &self,
        state: &mut ProgramState,
        event: &EngineEvent,
    ) -> Result<Vec<HookEffect>, CheckerRuntimeError>;
}
