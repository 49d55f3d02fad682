//! Brute-force differential oracle for the path explorer.
//!
//! `enumerate_paths_oracle` walks a function the dumb way: it forks at every
//! branch unconditionally, records the event stream of every syntactic path,
//! and only afterwards decides feasibility by checking the collected branch
//! assumptions for consistency. It shares no evaluation code with the
//! explorer — values, places, and assumption tracking are its own — so the
//! two implementations only agree if both got the language semantics right.
//! Checker hooks replayed over the oracle's feasible paths must then produce
//! exactly the reports the explorer produced.
//!
//! The oracle is deliberately limited: at most [`MAX_ORACLE_BRANCHES`]
//! branching statements and no loop inside another loop. Everything else is
//! mirrored rule for rule from the explorer's documented semantics:
//! evaluation order, lazy loads, the unroll cutoff that leaves a loop without
//! a final check, and the little table of what each comparison decides or
//! assumes.

use super::event::{AccessKind, ArgView, CheckerRuntimeError, EngineEvent, EventHooks, HookEffect};
use super::explore::EngineBudget;
use super::region::{Region, SymbolId, SymbolOrigin, SymbolicValue};
use super::state::ProgramState;
use crate::minilang::{CallExpr, CmpOp, Cond, Expr, FunctionDef, LValue, Stmt};
use crate::span::SourceSpan;
use std::collections::{BTreeMap, BTreeSet};

/// Ceiling on branching statements (`if` and `while` combined) the oracle
/// will enumerate.
pub const MAX_ORACLE_BRANCHES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleUnsupported {
    #[error("oracle cannot enumerate: {count} branching statements exceeds the supported {max}")]
    TooManyBranches { count: usize, max: usize },
    #[error("oracle cannot enumerate: loop at {span} contains another loop")]
    NestedLoop { span: SourceSpan },
}

/// One syntactic path: its full event stream and whether its branch
/// assumptions are mutually consistent.
#[derive(Debug, Clone)]
pub struct OraclePath {
    pub events: Vec<EngineEvent>,
    pub feasible: bool,
}

/// Enumerates every syntactic path through `func`. Only `budget.loop_unroll`
/// is consulted; the oracle has no node budget.
pub fn enumerate_paths_oracle(
    func: &FunctionDef,
    budget: &EngineBudget,
) -> Result<Vec<OraclePath>, OracleUnsupported> {
    check_supported(func)?;
    let mut oracle = Oracle {
        func,
        unroll: budget.loop_unroll,
        next_handle: 0,
        origins: BTreeMap::new(),
        finished: Vec::new(),
    };
    oracle.run();
    Ok(oracle.finished.into_iter().map(OCtx::into_path).collect())
}

/// Runs checker hooks over one recorded event stream on a fresh state,
/// collecting the (span, message) keys of every report effect.
pub fn replay_hooks(
    events: &[EngineEvent],
    hooks: &dyn EventHooks,
) -> Result<Vec<(SourceSpan, String)>, CheckerRuntimeError> {
    let mut state = ProgramState::new();
    let mut out = Vec::new();
    for event in events {
        for effect in hooks.on_event(&mut state, event)? {
            if let HookEffect::Report { span, message, .. } = effect {
                out.push((span, message));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Unsupported(#[from] OracleUnsupported),
    #[error(transparent)]
    Checker(#[from] CheckerRuntimeError),
}

/// Convenience wrapper for differential tests: the union of report keys over
/// all feasible paths.
pub fn oracle_report_set(
    func: &FunctionDef,
    hooks: &dyn EventHooks,
    budget: &EngineBudget,
) -> Result<BTreeSet<(SourceSpan, String)>, OracleError> {
    let mut keys = BTreeSet::new();
    for path in enumerate_paths_oracle(func, budget)? {
        if !path.feasible {
            continue;
        }
        keys.extend(replay_hooks(&path.events, hooks)?);
    }
    Ok(keys)
}

fn check_supported(func: &FunctionDef) -> Result<(), OracleUnsupported> {
    let count = count_branches(&func.body);
    if count > MAX_ORACLE_BRANCHES {
        return Err(OracleUnsupported::TooManyBranches { count, max: MAX_ORACLE_BRANCHES });
    }
    find_nested_loop(&func.body, false)?;
    Ok(())
}

fn count_branches(stmts: &[Stmt]) -> usize {
    stmts.iter().map(count_branches_stmt).sum()
}

fn count_branches_stmt(stmt: &Stmt) -> usize {
    match stmt {
        Stmt::If { then_branch, else_branch, .. } => {
            1 + count_branches_stmt(then_branch)
                + else_branch.as_deref().map(count_branches_stmt).unwrap_or(0)
        }
        Stmt::While { body, .. } => 1 + count_branches_stmt(body),
        Stmt::Block { stmts, .. } => count_branches(stmts),
        _ => 0,
    }
}

fn find_nested_loop(stmts: &[Stmt], inside_loop: bool) -> Result<(), OracleUnsupported> {
    for stmt in stmts {
        find_nested_loop_stmt(stmt, inside_loop)?;
    }
    Ok(())
}

fn find_nested_loop_stmt(stmt: &Stmt, inside_loop: bool) -> Result<(), OracleUnsupported> {
    match stmt {
        Stmt::While { body, span, .. } => {
            if inside_loop {
                return Err(OracleUnsupported::NestedLoop { span: *span });
            }
            find_nested_loop_stmt(body, true)
        }
        Stmt::If { then_branch, else_branch, .. } => {
            find_nested_loop_stmt(then_branch, inside_loop)?;
            if let Some(e) = else_branch {
                find_nested_loop_stmt(e, inside_loop)?;
            }
            Ok(())
        }
        Stmt::Block { stmts, .. } => find_nested_loop(stmts, inside_loop),
        _ => Ok(()),
    }
}

/// The oracle's own value domain.
#[derive(Clone, Debug, PartialEq, Eq)]
enum OVal {
    Int(i64),
    Null,
    Addr(String),
    Handle(u32),
    Unknown,
}

impl OVal {
    fn place(&self) -> Option<OPlace> {
        match self {
            OVal::Handle(h) => Some(OPlace::Mem(*h)),
            OVal::Addr(name) => Some(OPlace::Var(name.clone())),
            _ => None,
        }
    }
}

/// The oracle's own notion of a storage location.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum OPlace {
    Var(String),
    Mem(u32),
    Field(Box<OPlace>, String),
}

#[derive(Clone)]
struct OCtx {
    store: BTreeMap<OPlace, OVal>,
    /// (handle, assumed-to-be-null) literals collected at branches.
    assumptions: Vec<(u32, bool)>,
    /// Set as soon as a ground comparison contradicts the chosen branch.
    contradicted: bool,
    events: Vec<EngineEvent>,
}

impl OCtx {
    fn into_path(self) -> OraclePath {
        let feasible = !self.contradicted && literals_consistent(&self.assumptions);
        OraclePath { events: self.events, feasible }
    }
}

fn literals_consistent(assumptions: &[(u32, bool)]) -> bool {
    let mut seen: BTreeMap<u32, bool> = BTreeMap::new();
    for (handle, is_null) in assumptions {
        match seen.get(handle) {
            Some(prev) if prev != is_null => return false,
            Some(_) => {}
            None => {
                seen.insert(*handle, *is_null);
            }
        }
    }
    true
}

enum OFlow {
    Cont(OCtx),
    Returned(OCtx),
}

enum OOps {
    One(OVal),
    Two(OVal, OVal),
}

struct Oracle<'a> {
    func: &'a FunctionDef,
    unroll: u32,
    next_handle: u32,
    origins: BTreeMap<u32, SymbolOrigin>,
    finished: Vec<OCtx>,
}

impl<'a> Oracle<'a> {
    fn run(&mut self) {
        let mut ctx = OCtx {
            store: BTreeMap::new(),
            assumptions: Vec::new(),
            contradicted: false,
            events: Vec::new(),
        };
        for param in &self.func.params {
            let handle = self.fresh(SymbolOrigin::Param {
                name: param.name.clone(),
                span: param.span,
            });
            ctx.store.insert(OPlace::Var(param.name.clone()), OVal::Handle(handle));
        }
        let flows = self.exec_seq(&self.func.body, ctx);
        let end_span = SourceSpan::new(self.func.end_line, 1);
        for flow in flows {
            let mut ctx = match flow {
                OFlow::Cont(c) | OFlow::Returned(c) => c,
            };
            let locals: Vec<OPlace> = ctx
                .store
                .keys()
                .filter(|p| matches!(p, OPlace::Var(_)))
                .cloned()
                .collect();
            if !locals.is_empty() {
                let regions: Vec<Region> =
                    locals.iter().map(|p| self.region_of_place(p)).collect();
                ctx.events.push(EngineEvent::DeadSymbols { regions, span: end_span });
                for place in &locals {
                    ctx.store.remove(place);
                }
            }
            ctx.events.push(EngineEvent::EndFunction { span: end_span });
            self.finished.push(ctx);
        }
    }

    fn fresh(&mut self, origin: SymbolOrigin) -> u32 {
        let handle = self.next_handle;
        self.next_handle += 1;
        self.origins.insert(handle, origin);
        handle
    }

    fn region_of_place(&self, place: &OPlace) -> Region {
        match place {
            OPlace::Var(name) => Region::var(&self.func.name, name),
            OPlace::Mem(h) => Region::Sym(SymbolId(*h)),
            OPlace::Field(base, field) => Region::field(self.region_of_place(base), field),
        }
    }

    fn symbolic(&self, value: &OVal) -> SymbolicValue {
        match value {
            OVal::Int(i) => SymbolicValue::Concrete(*i),
            OVal::Null => SymbolicValue::Null,
            OVal::Addr(name) => {
                SymbolicValue::RegionAddress(Region::var(&self.func.name, name))
            }
            OVal::Handle(h) => SymbolicValue::Symbol {
                id: SymbolId(*h),
                origin: self.origins[h].clone(),
            },
            OVal::Unknown => SymbolicValue::Unknown,
        }
    }

    fn exec_seq(&mut self, stmts: &[Stmt], ctx: OCtx) -> Vec<OFlow> {
        let mut live = vec![ctx];
        let mut done = Vec::new();
        for stmt in stmts {
            let mut next = Vec::new();
            for ctx in live {
                for flow in self.exec_stmt(stmt, ctx) {
                    match flow {
                        OFlow::Cont(c) => next.push(c),
                        returned => done.push(returned),
                    }
                }
            }
            live = next;
        }
        done.extend(live.into_iter().map(OFlow::Cont));
        done
    }

    fn exec_stmt(&mut self, stmt: &Stmt, mut ctx: OCtx) -> Vec<OFlow> {
        match stmt {
            Stmt::Decl { name, init, span, .. } => {
                match init {
                    Some(expr) => {
                        let value = self.eval_expr(expr, &mut ctx);
                        self.bind(OPlace::Var(name.clone()), value, *span, &mut ctx);
                    }
                    None => {
                        ctx.store.remove(&OPlace::Var(name.clone()));
                    }
                }
                vec![OFlow::Cont(ctx)]
            }
            Stmt::Assign { target, value, span } => {
                let value = self.eval_expr(value, &mut ctx);
                match target {
                    LValue::Var { name, .. } => {
                        self.bind(OPlace::Var(name.clone()), value, *span, &mut ctx);
                    }
                    LValue::Deref { name, .. } => {
                        if let Some(place) = self.pointee_of(name, &ctx) {
                            self.store_through(place, value, *span, &mut ctx);
                        }
                    }
                    LValue::Field { base, field, .. } => {
                        if let Some(place) = self.pointee_of(base, &ctx) {
                            let place = OPlace::Field(Box::new(place), field.clone());
                            self.store_through(place, value, *span, &mut ctx);
                        }
                    }
                }
                vec![OFlow::Cont(ctx)]
            }
            Stmt::Call { call, .. } => {
                self.eval_call(call, &mut ctx);
                vec![OFlow::Cont(ctx)]
            }
            Stmt::If { cond, then_branch, else_branch, .. } => {
                let ops = self.eval_cond_operands(cond, &mut ctx);
                ctx.events.push(EngineEvent::BranchCondition {
                    cond: cond.clone(),
                    null_test: self.null_test(&ops),
                    span: cond.span(),
                });
                let mut out = Vec::new();
                let mut then_ctx = ctx.clone();
                self.note_assume(&mut then_ctx, cond, &ops, true);
                out.extend(self.exec_stmt(then_branch, then_ctx));
                self.note_assume(&mut ctx, cond, &ops, false);
                match else_branch {
                    Some(stmt) => out.extend(self.exec_stmt(stmt, ctx)),
                    None => out.push(OFlow::Cont(ctx)),
                }
                out
            }
            Stmt::While { cond, body, .. } => self.exec_while(cond, body, ctx, self.unroll),
            Stmt::Return { value, .. } => {
                if let Some(expr) = value {
                    self.eval_expr(expr, &mut ctx);
                }
                vec![OFlow::Returned(ctx)]
            }
            Stmt::Block { stmts, span } => {
                let declared: Vec<String> = stmts
                    .iter()
                    .filter_map(|s| match s {
                        Stmt::Decl { name, .. } => Some(name.clone()),
                        _ => None,
                    })
                    .collect();
                let flows = self.exec_seq(stmts, ctx);
                let mut out = Vec::new();
                for flow in flows {
                    match flow {
                        OFlow::Cont(mut c) => {
                            if !declared.is_empty() {
                                let regions: Vec<Region> = declared
                                    .iter()
                                    .map(|n| Region::var(&self.func.name, n))
                                    .collect();
                                c.events
                                    .push(EngineEvent::DeadSymbols { regions, span: *span });
                                for name in &declared {
                                    c.store.remove(&OPlace::Var(name.clone()));
                                }
                            }
                            out.push(OFlow::Cont(c));
                        }
                        returned => out.push(returned),
                    }
                }
                out
            }
        }
    }

    fn exec_while(&mut self, cond: &Cond, body: &Stmt, mut ctx: OCtx, remaining: u32) -> Vec<OFlow> {
        if remaining == 0 {
            return vec![OFlow::Cont(ctx)];
        }
        let ops = self.eval_cond_operands(cond, &mut ctx);
        ctx.events.push(EngineEvent::BranchCondition {
            cond: cond.clone(),
            null_test: self.null_test(&ops),
            span: cond.span(),
        });
        let mut out = Vec::new();
        let mut exit_ctx = ctx.clone();
        self.note_assume(&mut exit_ctx, cond, &ops, false);
        out.push(OFlow::Cont(exit_ctx));
        self.note_assume(&mut ctx, cond, &ops, true);
        for flow in self.exec_stmt(body, ctx) {
            match flow {
                OFlow::Cont(c) => out.extend(self.exec_while(cond, body, c, remaining - 1)),
                returned => out.push(returned),
            }
        }
        out
    }

    fn eval_expr(&mut self, expr: &Expr, ctx: &mut OCtx) -> OVal {
        match expr {
            Expr::Int { value, .. } => OVal::Int(*value),
            Expr::Null { .. } => OVal::Null,
            Expr::Var { name, .. } => ctx
                .store
                .get(&OPlace::Var(name.clone()))
                .cloned()
                .unwrap_or(OVal::Unknown),
            Expr::AddrOf { name, .. } => OVal::Addr(name.clone()),
            Expr::Deref { name, span } => match self.pointee_of(name, ctx) {
                Some(place) => self.load(place, *span, ctx),
                None => OVal::Unknown,
            },
            Expr::Field { base, field, span } => match self.pointee_of(base, ctx) {
                Some(place) => {
                    self.load(OPlace::Field(Box::new(place), field.clone()), *span, ctx)
                }
                None => OVal::Unknown,
            },
            Expr::Call(call) => self.eval_call(call, ctx),
        }
    }

    fn pointee_of(&self, name: &str, ctx: &OCtx) -> Option<OPlace> {
        ctx.store.get(&OPlace::Var(name.to_string())).and_then(OVal::place)
    }

    fn load(&mut self, place: OPlace, span: SourceSpan, ctx: &mut OCtx) -> OVal {
        ctx.events.push(EngineEvent::Location {
            kind: AccessKind::Load,
            region: self.region_of_place(&place),
            span,
        });
        if let Some(value) = ctx.store.get(&place) {
            return value.clone();
        }
        let handle = self.fresh(SymbolOrigin::Load { span });
        ctx.store.insert(place, OVal::Handle(handle));
        OVal::Handle(handle)
    }

    fn store_through(&mut self, place: OPlace, value: OVal, span: SourceSpan, ctx: &mut OCtx) {
        ctx.events.push(EngineEvent::Location {
            kind: AccessKind::Store,
            region: self.region_of_place(&place),
            span,
        });
        self.bind(place, value, span, ctx);
    }

    fn bind(&mut self, place: OPlace, value: OVal, span: SourceSpan, ctx: &mut OCtx) {
        ctx.events.push(EngineEvent::Bind {
            lhs: self.region_of_place(&place),
            rhs: self.symbolic(&value),
            span,
        });
        ctx.store.insert(place, value);
    }

    fn eval_call(&mut self, call: &CallExpr, ctx: &mut OCtx) -> OVal {
        let mut args = Vec::new();
        for arg in &call.args {
            let value = self.eval_expr(arg, ctx);
            let symbolic = self.symbolic(&value);
            args.push(ArgView { region: symbolic.region(), value: symbolic, span: arg.span() });
        }
        ctx.events.push(EngineEvent::PreCall {
            callee: call.callee.clone(),
            args: args.clone(),
            span: call.span,
        });
        let handle = self.fresh(SymbolOrigin::Call { callee: call.callee.clone(), span: call.span });
        ctx.events.push(EngineEvent::PostCall {
            callee: call.callee.clone(),
            args,
            return_value: self.symbolic(&OVal::Handle(handle)),
            return_region: Region::Sym(SymbolId(handle)),
            span: call.span,
        });
        OVal::Handle(handle)
    }

    fn eval_cond_operands(&mut self, cond: &Cond, ctx: &mut OCtx) -> OOps {
        match cond {
            Cond::Not { expr, .. } | Cond::Truthy { expr, .. } => {
                OOps::One(self.eval_expr(expr, ctx))
            }
            Cond::Cmp { lhs, rhs, .. } => {
                let left = self.eval_expr(lhs, ctx);
                let right = self.eval_expr(rhs, ctx);
                OOps::Two(left, right)
            }
        }
    }

    fn null_test(&self, ops: &OOps) -> Option<Region> {
        match ops {
            OOps::One(OVal::Handle(h)) => Some(Region::Sym(SymbolId(*h))),
            OOps::Two(OVal::Handle(h), other) | OOps::Two(other, OVal::Handle(h))
                if zeroish(other) =>
            {
                Some(Region::Sym(SymbolId(*h)))
            }
            _ => None,
        }
    }

    fn note_assume(&self, ctx: &mut OCtx, cond: &Cond, ops: &OOps, want_true: bool) {
        match (cond, ops) {
            (Cond::Truthy { .. }, OOps::One(v)) => note_truthy(ctx, v, want_true),
            (Cond::Not { .. }, OOps::One(v)) => note_truthy(ctx, v, !want_true),
            (Cond::Cmp { op: CmpOp::Eq, .. }, OOps::Two(a, b)) => note_eq(ctx, a, b, want_true),
            (Cond::Cmp { op: CmpOp::Ne, .. }, OOps::Two(a, b)) => note_eq(ctx, a, b, !want_true),
            _ => {}
        }
    }
}

fn zeroish(value: &OVal) -> bool {
    matches!(value, OVal::Null | OVal::Int(0))
}

fn note_truthy(ctx: &mut OCtx, value: &OVal, want_true: bool) {
    match value {
        OVal::Int(i) => {
            if (*i != 0) != want_true {
                ctx.contradicted = true;
            }
        }
        OVal::Null => {
            if want_true {
                ctx.contradicted = true;
            }
        }
        OVal::Addr(_) => {
            if !want_true {
                ctx.contradicted = true;
            }
        }
        OVal::Unknown => {}
        OVal::Handle(h) => ctx.assumptions.push((*h, !want_true)),
    }
}

fn note_eq(ctx: &mut OCtx, a: &OVal, b: &OVal, want_equal: bool) {
    let mut decide = |actually_equal: bool| {
        if actually_equal != want_equal {
            ctx.contradicted = true;
        }
    };
    match (a, b) {
        (OVal::Int(x), OVal::Int(y)) => decide(x == y),
        (OVal::Null, OVal::Null) => decide(true),
        (OVal::Null, OVal::Int(c)) | (OVal::Int(c), OVal::Null) => decide(*c == 0),
        (OVal::Addr(r1), OVal::Addr(r2)) => decide(r1 == r2),
        (OVal::Addr(_), OVal::Null) | (OVal::Null, OVal::Addr(_)) => decide(false),
        (OVal::Addr(_), OVal::Int(c)) | (OVal::Int(c), OVal::Addr(_)) => {
            if *c == 0 {
                decide(false)
            }
        }
        (OVal::Handle(x), OVal::Handle(y)) if x == y => decide(true),
        (OVal::Handle(h), other) | (other, OVal::Handle(h)) if zeroish(other) => {
            ctx.assumptions.push((*h, want_equal));
        }
        _ => {}
    }
}
