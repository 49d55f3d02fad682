use crate::engine::AccessKind;
use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckerDef {
    pub name: String,
    pub maps: Vec<MapDecl>,
    pub uses_alias_map: bool,
    pub templates: Vec<TemplateDecl>,
    pub handlers: Vec<Handler>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDecl {
    pub name: String,
    pub tags: Vec<String>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateDecl {
    pub name: String,
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    PostCall,
    PreCall,
    BranchCondition,
    Location,
    Bind,
    EndFunction,
}

impl EventKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EventKind::PostCall => "post_call",
            EventKind::PreCall => "pre_call",
            EventKind::BranchCondition => "branch_condition",
            EventKind::Location => "location",
            EventKind::Bind => "bind",
            EventKind::EndFunction => "end_function",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Handler {
    pub event: EventKind,
    pub guards: Vec<Guard>,
    pub actions: Vec<Action>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Guard {
    /// The call's callee has exactly this name.
    CalleeIs { name: String, span: SourceSpan },
    /// The call has exactly this many arguments.
    ArgCount { count: usize, span: SourceSpan },
    /// The memory access is a load or a store.
    AccessKind { kind: AccessKind, span: SourceSpan },
    /// The branch tests some pointer against NULL; binds `var` to its region.
    NullTestOn { var: String, span: SourceSpan },
    /// The region currently carries `tag` in `map`. In an `end_function`
    /// handler an unbound variable here quantifies over every tagged region.
    StateIs { map: String, region: RegionExpr, tag: String, span: SourceSpan },
}

impl Guard {
    pub fn span(&self) -> SourceSpan {
        match self {
            Guard::CalleeIs { span, .. }
            | Guard::ArgCount { span, .. }
            | Guard::AccessKind { span, .. }
            | Guard::NullTestOn { span, .. }
            | Guard::StateIs { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Action {
    SetState { map: String, region: RegionExpr, tag: String, span: SourceSpan },
    ClearState { map: String, region: RegionExpr, span: SourceSpan },
    PropagateAlias { lhs: RegionExpr, rhs: RegionExpr, span: SourceSpan },
    MarkAllAliases { map: String, region: RegionExpr, tag: String, span: SourceSpan },
    Report { template: String, region: RegionExpr, span: SourceSpan },
}

impl Action {
    pub fn span(&self) -> SourceSpan {
        match self {
            Action::SetState { span, .. }
            | Action::ClearState { span, .. }
            | Action::PropagateAlias { span, .. }
            | Action::MarkAllAliases { span, .. }
            | Action::Report { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionExpr {
    /// Region of the i-th call argument (`pre_call`/`post_call`).
    ArgRegion { index: usize, span: SourceSpan },
    /// Region of the call's return value (`post_call`).
    ReturnRegion { span: SourceSpan },
    /// Accessed region with field layers stripped (`location`).
    BaseRegion { span: SourceSpan },
    /// Binding target (`bind`).
    Lhs { span: SourceSpan },
    /// Region of the bound value, if it designates one (`bind`).
    Rhs { span: SourceSpan },
    /// A variable bound by a guard in the same handler.
    Var { name: String, span: SourceSpan },
}

impl RegionExpr {
    pub fn span(&self) -> SourceSpan {
        match self {
            RegionExpr::ArgRegion { span, .. }
            | RegionExpr::ReturnRegion { span }
            | RegionExpr::BaseRegion { span }
            | RegionExpr::Lhs { span }
            | RegionExpr::Rhs { span }
            | RegionExpr::Var { span, .. } => *span,
        }
    }
}
