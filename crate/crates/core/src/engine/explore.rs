//! The path explorer.
//!
//! `analyze_function` walks every feasible path through one function,
//! publishing events to the checker hooks as it goes. Paths fork at branches
//! and loop checks; a branch whose assumption contradicts the path's existing
//! nullness facts is pruned. Loops are unrolled a fixed number of times: a
//! path that has already entered the loop `loop_unroll` times falls through
//! past it without another condition check.
//!
//! Evaluation order, which the differential oracle mirrors exactly:
//! right-hand sides evaluate before assignment targets resolve; call
//! arguments evaluate left to right before `PreCall`; condition operands
//! evaluate before `BranchCondition` fires; a pointer store fires `Location`
//! then `Bind`; loads through never-written memory fire `Location` and then
//! silently materialize a fresh symbol. Branch hooks run once, before the
//! fork, so their state changes apply to both successors. Dereferencing a
//! value that designates no region (NULL, plain ints, unknowns) accesses
//! nothing and fires nothing.

use super::event::{AccessKind, ArgView, CheckerRuntimeError, EngineEvent, EventHooks, HookEffect};
use super::region::{Region, SymbolId, SymbolOrigin, SymbolicValue};
use super::report::{sort_reports, Report, TraceEntry};
use super::state::{Nullness, ProgramState};
use crate::minilang::{CallExpr, CmpOp, Cond, Expr, FunctionDef, LValue, Stmt};
use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineBudget {
    /// Cap on executed statements across all paths; beyond it the run is
    /// truncated and whatever was found so far is returned.
    pub max_nodes: usize,
    /// How many times a path may enter any one loop.
    pub loop_unroll: u32,
}

impl Default for EngineBudget {
    fn default() -> Self {
        EngineBudget { max_nodes: 10_000, loop_unroll: 2 }
    }
}

/// Outcome of exploring one function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub reports: Vec<Report>,
    /// True when the node budget ran out and some paths were abandoned.
    pub truncated: bool,
    pub nodes_explored: usize,
    pub paths_completed: usize,
}

/// Explores `func` path-sensitively, feeding events to `hooks`.
///
/// Reports are deduplicated by (span, message) across paths — the first path
/// to reach a report keeps its trace — then sorted. A checker error aborts
/// the whole run.
pub fn analyze_function(
    func: &FunctionDef,
    file: &str,
    hooks: &dyn EventHooks,
    budget: &EngineBudget,
) -> Result<Analysis, CheckerRuntimeError> {
    Explorer {
        func,
        file,
        hooks,
        budget,
        next_symbol: 0,
        nodes: 0,
        truncated: false,
        reports: Vec::new(),
        seen: BTreeSet::new(),
        paths_completed: 0,
    }
    .run()
}

#[derive(Clone)]
struct PathCtx {
    state: ProgramState,
    /// Region-tagged breadcrumbs for report traces.
    notes: Vec<(Region, SourceSpan, String)>,
    /// Branch decisions taken, in order. Grows monotonically along a path,
    /// which keeps every explored program point unique within it.
    decisions: Vec<bool>,
}

enum Flow {
    Cont(PathCtx),
    Returned(PathCtx),
}

enum CondOps {
    One(SymbolicValue),
    Two(SymbolicValue, SymbolicValue),
}

struct Explorer<'a> {
    func: &'a FunctionDef,
    file: &'a str,
    hooks: &'a dyn EventHooks,
    budget: &'a EngineBudget,
    next_symbol: u32,
    nodes: usize,
    truncated: bool,
    reports: Vec<Report>,
    seen: BTreeSet<(SourceSpan, String)>,
    paths_completed: usize,
}

impl<'a> Explorer<'a> {
    fn run(mut self) -> Result<Analysis, CheckerRuntimeError> {
        let mut path = PathCtx {
            state: ProgramState::new(),
            notes: Vec::new(),
            decisions: Vec::new(),
        };
        for param in &self.func.params {
            let id = self.fresh();
            let value = SymbolicValue::Symbol {
                id,
                origin: SymbolOrigin::Param { name: param.name.clone(), span: param.span },
            };
            path.state.bind(self.var(&param.name), value);
        }
        let flows = self.exec_seq(&self.func.body, path)?;
        let end_span = SourceSpan::new(self.func.end_line, 1);
        for flow in flows {
            let mut p = match flow {
                Flow::Cont(p) | Flow::Returned(p) => p,
            };
            let locals: Vec<Region> = p
                .state
                .bindings
                .keys()
                .filter(|r| matches!(r, Region::Var { .. }))
                .cloned()
                .collect();
            if !locals.is_empty() {
                self.dispatch(
                    &mut p,
                    &EngineEvent::DeadSymbols { regions: locals.clone(), span: end_span },
                )?;
                p.state.remove_bindings(&locals);
            }
            self.dispatch(&mut p, &EngineEvent::EndFunction { span: end_span })?;
            self.paths_completed += 1;
        }
        let mut reports = std::mem::take(&mut self.reports);
        sort_reports(&mut reports);
        Ok(Analysis {
            reports,
            truncated: self.truncated,
            nodes_explored: self.nodes,
            paths_completed: self.paths_completed,
        })
    }

    fn var(&self, name: &str) -> Region {
        Region::var(&self.func.name, name)
    }

    fn fresh(&mut self) -> SymbolId {
        let id = SymbolId(self.next_symbol);
        self.next_symbol += 1;
        id
    }

    /// Charges one node against the budget. Returns false when the budget is
    /// spent; the caller then abandons the path.
    fn charge(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            self.truncated = true;
            false
        } else {
            true
        }
    }

    fn exec_seq(&mut self, stmts: &[Stmt], path: PathCtx) -> Result<Vec<Flow>, CheckerRuntimeError> {
        let mut live = vec![path];
        let mut done: Vec<Flow> = Vec::new();
        for stmt in stmts {
            let mut next = Vec::new();
            for p in live {
                for flow in self.exec_stmt(stmt, p)? {
                    match flow {
                        Flow::Cont(p) => next.push(p),
                        returned => done.push(returned),
                    }
                }
            }
            live = next;
        }
        done.extend(live.into_iter().map(Flow::Cont));
        Ok(done)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, mut path: PathCtx) -> Result<Vec<Flow>, CheckerRuntimeError> {
        if !self.charge() {
            return Ok(Vec::new());
        }
        match stmt {
            Stmt::Decl { name, init, span, .. } => {
                match init {
                    Some(expr) => {
                        let value = self.eval_expr(expr, &mut path)?;
                        self.bind(self.var(name), value, *span, &mut path)?;
                    }
                    None => {
                        let region = self.var(name);
                        path.state.bindings.remove(&region);
                    }
                }
                Ok(vec![Flow::Cont(path)])
            }
            Stmt::Assign { target, value, span } => {
                let value = self.eval_expr(value, &mut path)?;
                match target {
                    LValue::Var { name, .. } => {
                        self.bind(self.var(name), value, *span, &mut path)?;
                    }
                    LValue::Deref { name, .. } => {
                        if let Some(region) = self.pointee_of(name, &path) {
                            self.store(region, value, *span, &mut path)?;
                        }
                    }
                    LValue::Field { base, field, .. } => {
                        if let Some(parent) = self.pointee_of(base, &path) {
                            self.store(Region::field(parent, field), value, *span, &mut path)?;
                        }
                    }
                }
                Ok(vec![Flow::Cont(path)])
            }
            Stmt::Call { call, .. } => {
                self.eval_call(call, &mut path)?;
                Ok(vec![Flow::Cont(path)])
            }
            Stmt::If { cond, then_branch, else_branch, .. } => {
                let ops = self.eval_cond_operands(cond, &mut path)?;
                let null_test = null_test_region(&ops);
                self.dispatch(
                    &mut path,
                    &EngineEvent::BranchCondition {
                        cond: cond.clone(),
                        null_test,
                        span: cond.span(),
                    },
                )?;
                let mut out = Vec::new();
                let mut then_path = path.clone();
                if assume_cond(&mut then_path.state, cond, &ops, true) {
                    then_path.decisions.push(true);
                    out.extend(self.exec_stmt(then_branch, then_path)?);
                }
                if assume_cond(&mut path.state, cond, &ops, false) {
                    path.decisions.push(false);
                    match else_branch {
                        Some(stmt) => out.extend(self.exec_stmt(stmt, path)?),
                        None => out.push(Flow::Cont(path)),
                    }
                }
                Ok(out)
            }
            Stmt::While { cond, body, .. } => {
                self.exec_while(cond, body, path, self.budget.loop_unroll)
            }
            Stmt::Return { value, .. } => {
                if let Some(expr) = value {
                    self.eval_expr(expr, &mut path)?;
                }
                Ok(vec![Flow::Returned(path)])
            }
            Stmt::Block { stmts, span } => {
                let declared: Vec<Region> = stmts
                    .iter()
                    .filter_map(|s| match s {
                        Stmt::Decl { name, .. } => Some(self.var(name)),
                        _ => None,
                    })
                    .collect();
                let flows = self.exec_seq(stmts, path)?;
                let mut out = Vec::new();
                for flow in flows {
                    match flow {
                        Flow::Cont(mut p) => {
                            if !declared.is_empty() {
                                self.dispatch(
                                    &mut p,
                                    &EngineEvent::DeadSymbols {
                                        regions: declared.clone(),
                                        span: *span,
                                    },
                                )?;
                                p.state.remove_bindings(&declared);
                            }
                            out.push(Flow::Cont(p));
                        }
                        returned => out.push(returned),
                    }
                }
                Ok(out)
            }
        }
    }

    fn exec_while(
        &mut self,
        cond: &Cond,
        body: &Stmt,
        mut path: PathCtx,
        remaining: u32,
    ) -> Result<Vec<Flow>, CheckerRuntimeError> {
        if !self.charge() {
            return Ok(Vec::new());
        }
        if remaining == 0 {
            // Unroll budget spent: leave the loop without another check.
            return Ok(vec![Flow::Cont(path)]);
        }
        let ops = self.eval_cond_operands(cond, &mut path)?;
        let null_test = null_test_region(&ops);
        self.dispatch(
            &mut path,
            &EngineEvent::BranchCondition { cond: cond.clone(), null_test, span: cond.span() },
        )?;
        let mut out = Vec::new();
        let mut exit_path = path.clone();
        if assume_cond(&mut exit_path.state, cond, &ops, false) {
            exit_path.decisions.push(false);
            out.push(Flow::Cont(exit_path));
        }
        if assume_cond(&mut path.state, cond, &ops, true) {
            path.decisions.push(true);
            for flow in self.exec_stmt(body, path)? {
                match flow {
                    Flow::Cont(p) => out.extend(self.exec_while(cond, body, p, remaining - 1)?),
                    returned => out.push(returned),
                }
            }
        }
        Ok(out)
    }

    fn eval_expr(&mut self, expr: &Expr, path: &mut PathCtx) -> Result<SymbolicValue, CheckerRuntimeError> {
        match expr {
            Expr::Int { value, .. } => Ok(SymbolicValue::Concrete(*value)),
            Expr::Null { .. } => Ok(SymbolicValue::Null),
            Expr::Var { name, .. } => Ok(path
                .state
                .value_of(&self.var(name))
                .cloned()
                .unwrap_or(SymbolicValue::Unknown)),
            Expr::AddrOf { name, .. } => Ok(SymbolicValue::RegionAddress(self.var(name))),
            Expr::Deref { name, span } => match self.pointee_of(name, path) {
                Some(region) => self.load(region, *span, path),
                None => Ok(SymbolicValue::Unknown),
            },
            Expr::Field { base, field, span } => match self.pointee_of(base, path) {
                Some(parent) => self.load(Region::field(parent, field), *span, path),
                None => Ok(SymbolicValue::Unknown),
            },
            Expr::Call(call) => self.eval_call(call, path),
        }
    }

    /// The region variable `name` points at, if its value designates one.
    fn pointee_of(&self, name: &str, path: &PathCtx) -> Option<Region> {
        path.state.value_of(&self.var(name)).and_then(SymbolicValue::region)
    }

    fn load(
        &mut self,
        region: Region,
        span: SourceSpan,
        path: &mut PathCtx,
    ) -> Result<SymbolicValue, CheckerRuntimeError> {
        self.dispatch(
            path,
            &EngineEvent::Location { kind: AccessKind::Load, region: region.clone(), span },
        )?;
        if let Some(value) = path.state.value_of(&region) {
            return Ok(value.clone());
        }
        let id = self.fresh();
        let value = SymbolicValue::Symbol { id, origin: SymbolOrigin::Load { span } };
        path.state.bind(region, value.clone());
        Ok(value)
    }

    fn store(
        &mut self,
        region: Region,
        value: SymbolicValue,
        span: SourceSpan,
        path: &mut PathCtx,
    ) -> Result<(), CheckerRuntimeError> {
        self.dispatch(
            path,
            &EngineEvent::Location { kind: AccessKind::Store, region: region.clone(), span },
        )?;
        self.bind(region, value, span, path)
    }

    fn bind(
        &mut self,
        region: Region,
        value: SymbolicValue,
        span: SourceSpan,
        path: &mut PathCtx,
    ) -> Result<(), CheckerRuntimeError> {
        self.dispatch(
            path,
            &EngineEvent::Bind { lhs: region.clone(), rhs: value.clone(), span },
        )?;
        path.state.bind(region, value);
        Ok(())
    }

    fn eval_call(&mut self, call: &CallExpr, path: &mut PathCtx) -> Result<SymbolicValue, CheckerRuntimeError> {
        let mut args = Vec::new();
        for arg in &call.args {
            let value = self.eval_expr(arg, path)?;
            args.push(ArgView { region: value.region(), value, span: arg.span() });
        }
        self.dispatch(
            path,
            &EngineEvent::PreCall { callee: call.callee.clone(), args: args.clone(), span: call.span },
        )?;
        let id = self.fresh();
        let ret = SymbolicValue::Symbol {
            id,
            origin: SymbolOrigin::Call { callee: call.callee.clone(), span: call.span },
        };
        self.dispatch(
            path,
            &EngineEvent::PostCall {
                callee: call.callee.clone(),
                args,
                return_value: ret.clone(),
                return_region: Region::Sym(id),
                span: call.span,
            },
        )?;
        Ok(ret)
    }

    fn eval_cond_operands(&mut self, cond: &Cond, path: &mut PathCtx) -> Result<CondOps, CheckerRuntimeError> {
        match cond {
            Cond::Not { expr, .. } | Cond::Truthy { expr, .. } => {
                Ok(CondOps::One(self.eval_expr(expr, path)?))
            }
            Cond::Cmp { lhs, rhs, .. } => {
                let left = self.eval_expr(lhs, path)?;
                let right = self.eval_expr(rhs, path)?;
                Ok(CondOps::Two(left, right))
            }
        }
    }

    /// Publishes an event: engine breadcrumbs first, then the checker hooks,
    /// then the hooks' effects.
    fn dispatch(&mut self, path: &mut PathCtx, event: &EngineEvent) -> Result<(), CheckerRuntimeError> {
        push_engine_notes(&mut path.notes, event);
        let effects = self.hooks.on_event(&mut path.state, event)?;
        for effect in effects {
            match effect {
                HookEffect::Note { region, span, text } => path.notes.push((region, span, text)),
                HookEffect::Report { region, span, message } => {
                    self.emit_report(path, region.as_ref(), span, message);
                }
            }
        }
        Ok(())
    }

    fn emit_report(&mut self, path: &PathCtx, region: Option<&Region>, span: SourceSpan, message: String) {
        if !self.seen.insert((span, message.clone())) {
            return;
        }
        let mut trace = Vec::new();
        if let Some(r) = region {
            let rep = path.state.representative(r);
            for (note_region, note_span, text) in &path.notes {
                if path.state.representative(note_region) == rep {
                    trace.push(TraceEntry { span: *note_span, note: text.clone() });
                }
            }
        }
        trace.push(TraceEntry { span, note: message.clone() });
        self.reports.push(Report {
            checker: self.hooks.checker_name().to_string(),
            file: self.file.to_string(),
            span,
            message,
            trace,
        });
    }
}

/// Breadcrumbs the engine itself records so report traces can tell the story
/// of the reported value: where it came from, where it was stored or handed
/// off, and where it was tested.
fn push_engine_notes(notes: &mut Vec<(Region, SourceSpan, String)>, event: &EngineEvent) {
    match event {
        EngineEvent::PostCall { callee, return_region, span, .. } => {
            notes.push((
                return_region.clone(),
                *span,
                format!("value obtained from call to {callee}"),
            ));
        }
        EngineEvent::PreCall { callee, args, span } => {
            for arg in args {
                if let Some(region) = &arg.region {
                    notes.push((region.clone(), *span, format!("value passed to {callee}")));
                }
            }
        }
        EngineEvent::BranchCondition { null_test: Some(region), span, .. } => {
            notes.push((region.clone(), *span, "pointer compared against NULL".to_string()));
        }
        EngineEvent::Bind { lhs, rhs, span } => {
            if let Some(region) = rhs.region() {
                notes.push((region, *span, format!("value stored in {lhs}")));
            }
        }
        _ => {}
    }
}

/// Detects the `p == NULL` / `!p` / `if (p)` shapes: some symbol compared
/// against nothing-ness. Returns the region of the tested symbol.
fn null_test_region(ops: &CondOps) -> Option<Region> {
    match ops {
        CondOps::One(SymbolicValue::Symbol { id, .. }) => Some(Region::Sym(*id)),
        CondOps::Two(SymbolicValue::Symbol { id, .. }, other)
        | CondOps::Two(other, SymbolicValue::Symbol { id, .. })
            if is_zeroish(other) =>
        {
            Some(Region::Sym(*id))
        }
        _ => None,
    }
}

fn is_zeroish(value: &SymbolicValue) -> bool {
    matches!(value, SymbolicValue::Null | SymbolicValue::Concrete(0))
}

/// Constrains `state` with `cond == want_true` over the already-evaluated
/// operands. Returns false when the branch is infeasible.
///
/// The constraint domain is deliberately small and the differential oracle
/// mirrors it rule for rule: ground comparisons decide exactly; a symbol
/// tested for truth or compared against NULL/0 gains a nullness fact; every
/// other comparison involving a symbol or an unknown constrains nothing.
fn assume_cond(state: &mut ProgramState, cond: &Cond, ops: &CondOps, want_true: bool) -> bool {
    match (cond, ops) {
        (Cond::Truthy { .. }, CondOps::One(v)) => assume_truthy(state, v, want_true),
        (Cond::Not { .. }, CondOps::One(v)) => assume_truthy(state, v, !want_true),
        (Cond::Cmp { op: CmpOp::Eq, .. }, CondOps::Two(a, b)) => assume_eq(state, a, b, want_true),
        (Cond::Cmp { op: CmpOp::Ne, .. }, CondOps::Two(a, b)) => assume_eq(state, a, b, !want_true),
        // Operand shape always matches the condition shape.
        _ => true,
    }
}

fn assume_truthy(state: &mut ProgramState, value: &SymbolicValue, want_true: bool) -> bool {
    match value {
        SymbolicValue::Concrete(i) => (*i != 0) == want_true,
        SymbolicValue::Null => !want_true,
        SymbolicValue::RegionAddress(_) => want_true,
        SymbolicValue::Unknown => true,
        SymbolicValue::Symbol { id, .. } => state.assume_nullness(
            *id,
            if want_true { Nullness::MustNonNull } else { Nullness::MustNull },
        ),
    }
}

fn assume_eq(state: &mut ProgramState, a: &SymbolicValue, b: &SymbolicValue, want_equal: bool) -> bool {
    use SymbolicValue as V;
    match (a, b) {
        (V::Concrete(x), V::Concrete(y)) => (x == y) == want_equal,
        (V::Null, V::Null) => want_equal,
        (V::Null, V::Concrete(c)) | (V::Concrete(c), V::Null) => (*c == 0) == want_equal,
        (V::RegionAddress(r1), V::RegionAddress(r2)) => (r1 == r2) == want_equal,
        (V::RegionAddress(_), V::Null) | (V::Null, V::RegionAddress(_)) => !want_equal,
        (V::RegionAddress(_), V::Concrete(c)) | (V::Concrete(c), V::RegionAddress(_)) => {
            if *c == 0 {
                !want_equal
            } else {
                true
            }
        }
        (V::Symbol { id: x, .. }, V::Symbol { id: y, .. }) if x == y => want_equal,
        (V::Symbol { id, .. }, other) | (other, V::Symbol { id, .. }) if is_zeroish(other) => state
            .assume_nullness(
                *id,
                if want_equal { Nullness::MustNull } else { Nullness::MustNonNull },
            ),
        _ => true,
    }
}
