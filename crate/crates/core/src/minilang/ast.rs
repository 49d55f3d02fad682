use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};

/// Base type of a declaration. The language has no structs; record-like data
/// is only reachable through `->` field access on opaque pointers.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseType {
    Int,
    Void,
}

/// A declared type: a base type plus a pointer depth (`int**` has depth 2).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeName {
    pub base: BaseType,
    pub ptr_depth: u8,
}

impl TypeName {
    pub fn int() -> Self {
        TypeName { base: BaseType::Int, ptr_depth: 0 }
    }

    pub fn int_ptr() -> Self {
        TypeName { base: BaseType::Int, ptr_depth: 1 }
    }

    pub fn is_pointer(&self) -> bool {
        self.ptr_depth > 0
    }
}

impl std::fmt::Display for TypeName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.base {
            BaseType::Int => write!(f, "int")?,
            BaseType::Void => write!(f, "void")?,
        }
        for _ in 0..self.ptr_depth {
            write!(f, "*")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Module {
    pub functions: Vec<FunctionDef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub ret: TypeName,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
    /// Line of the closing brace; used to slice function text out of a file.
    pub end_line: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub ty: TypeName,
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CallExpr {
    pub callee: String,
    pub args: Vec<Expr>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Int { value: i64, span: SourceSpan },
    Null { span: SourceSpan },
    Var { name: String, span: SourceSpan },
    Call(CallExpr),
    /// `&x`
    AddrOf { name: String, span: SourceSpan },
    /// `*p`
    Deref { name: String, span: SourceSpan },
    /// `p->f`
    Field { base: String, field: String, span: SourceSpan },
}

impl Expr {
    pub fn span(&self) -> SourceSpan {
        match self {
            Expr::Int { span, .. }
            | Expr::Null { span }
            | Expr::Var { span, .. }
            | Expr::AddrOf { span, .. }
            | Expr::Deref { span, .. }
            | Expr::Field { span, .. } => *span,
            Expr::Call(c) => c.span,
        }
    }
}

/// Assignment targets. Dereferences only go through a bare name, so there is
/// no general place-expression grammar to support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LValue {
    Var { name: String, span: SourceSpan },
    Deref { name: String, span: SourceSpan },
    Field { base: String, field: String, span: SourceSpan },
}

impl LValue {
    pub fn span(&self) -> SourceSpan {
        match self {
            LValue::Var { span, .. } | LValue::Deref { span, .. } | LValue::Field { span, .. } => {
                *span
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
}

impl std::fmt::Display for CmpOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmpOp::Eq => write!(f, "=="),
            CmpOp::Ne => write!(f, "!="),
        }
    }
}

/// Branch and loop conditions. There is no boolean connective syntax; complex
/// conditions are expressed with nested `if` in source programs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cond {
    Not { expr: Expr, span: SourceSpan },
    Cmp { lhs: Expr, op: CmpOp, rhs: Expr, span: SourceSpan },
    Truthy { expr: Expr, span: SourceSpan },
}

impl Cond {
    pub fn span(&self) -> SourceSpan {
        match self {
            Cond::Not { span, .. } | Cond::Cmp { span, .. } | Cond::Truthy { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Stmt {
    Decl { ty: TypeName, name: String, init: Option<Expr>, span: SourceSpan },
    Assign { target: LValue, value: Expr, span: SourceSpan },
    Call { call: CallExpr, span: SourceSpan },
    If {
        cond: Cond,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
        span: SourceSpan,
    },
    While { cond: Cond, body: Box<Stmt>, span: SourceSpan },
    Return { value: Option<Expr>, span: SourceSpan },
    Block { stmts: Vec<Stmt>, span: SourceSpan },
}

impl Stmt {
    pub fn span(&self) -> SourceSpan {
        match self {
            Stmt::Decl { span, .. }
            | Stmt::Assign { span, .. }
            | Stmt::Call { span, .. }
            | Stmt::If { span, .. }
            | Stmt::While { span, .. }
            | Stmt::Return { span, .. }
            | Stmt::Block { span, .. } => *span,
        }
    }
}

// Structural equality below ignores spans entirely so that a parse -> print ->
// parse round trip can be compared even though the printed layout moves every
// token.

pub fn module_eq(a: &Module, b: &Module) -> bool {
    a.functions.len() == b.functions.len()
        && a.functions.iter().zip(&b.functions).all(|(x, y)| function_eq(x, y))
}

pub fn function_eq(a: &FunctionDef, b: &FunctionDef) -> bool {
    a.ret == b.ret
        && a.name == b.name
        && a.params.len() == b.params.len()
        && a.params
            .iter()
            .zip(&b.params)
            .all(|(p, q)| p.ty == q.ty && p.name == q.name)
        && stmts_eq(&a.body, &b.body)
}

fn stmts_eq(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| stmt_eq(x, y))
}

pub fn stmt_eq(a: &Stmt, b: &Stmt) -> bool {
    match (a, b) {
        (
            Stmt::Decl { ty: t1, name: n1, init: i1, .. },
            Stmt::Decl { ty: t2, name: n2, init: i2, .. },
        ) => {
            t1 == t2
                && n1 == n2
                && match (i1, i2) {
                    (None, None) => true,
                    (Some(x), Some(y)) => expr_eq(x, y),
                    _ => false,
                }
        }
        (
            Stmt::Assign { target: l1, value: v1, .. },
            Stmt::Assign { target: l2, value: v2, .. },
        ) => lvalue_eq(l1, l2) && expr_eq(v1, v2),
        (Stmt::Call { call: c1, .. }, Stmt::Call { call: c2, .. }) => call_eq(c1, c2),
        (
            Stmt::If { cond: c1, then_branch: t1, else_branch: e1, .. },
            Stmt::If { cond: c2, then_branch: t2, else_branch: e2, .. },
        ) => {
            cond_eq(c1, c2)
                && stmt_eq(t1, t2)
                && match (e1, e2) {
                    (None, None) => true,
                    (Some(x), Some(y)) => stmt_eq(x, y),
                    _ => false,
                }
        }
        (Stmt::While { cond: c1, body: b1, .. }, Stmt::While { cond: c2, body: b2, .. }) => {
            cond_eq(c1, c2) && stmt_eq(b1, b2)
        }
        (Stmt::Return { value: v1, .. }, Stmt::Return { value: v2, .. }) => match (v1, v2) {
            (None, None) => true,
            (Some(x), Some(y)) => expr_eq(x, y),
            _ => false,
        },
        (Stmt::Block { stmts: s1, .. }, Stmt::Block { stmts: s2, .. }) => stmts_eq(s1, s2),
        _ => false,
    }
}

fn lvalue_eq(a: &LValue, b: &LValue) -> bool {
    match (a, b) {
        (LValue::Var { name: n1, .. }, LValue::Var { name: n2, .. }) => n1 == n2,
        (LValue::Deref { name: n1, .. }, LValue::Deref { name: n2, .. }) => n1 == n2,
        (
            LValue::Field { base: b1, field: f1, .. },
            LValue::Field { base: b2, field: f2, .. },
        ) => b1 == b2 && f1 == f2,
        _ => false,
    }
}

fn cond_eq(a: &Cond, b: &Cond) -> bool {
    match (a, b) {
        (Cond::Not { expr: e1, .. }, Cond::Not { expr: e2, .. }) => expr_eq(e1, e2),
        (
            Cond::Cmp { lhs: l1, op: o1, rhs: r1, .. },
            Cond::Cmp { lhs: l2, op: o2, rhs: r2, .. },
        ) => o1 == o2 && expr_eq(l1, l2) && expr_eq(r1, r2),
        (Cond::Truthy { expr: e1, .. }, Cond::Truthy { expr: e2, .. }) => expr_eq(e1, e2),
        _ => false,
    }
}

fn call_eq(a: &CallExpr, b: &CallExpr) -> bool {
    a.callee == b.callee
        && a.args.len() == b.args.len()
        && a.args.iter().zip(&b.args).all(|(x, y)| expr_eq(x, y))
}

pub fn expr_eq(a: &Expr, b: &Expr) -> bool {
    match (a, b) {
        (Expr::Int { value: v1, .. }, Expr::Int { value: v2, .. }) => v1 == v2,
        (Expr::Null { .. }, Expr::Null { .. }) => true,
        (Expr::Var { name: n1, .. }, Expr::Var { name: n2, .. }) => n1 == n2,
        (Expr::Call(c1), Expr::Call(c2)) => call_eq(c1, c2),
        (Expr::AddrOf { name: n1, .. }, Expr::AddrOf { name: n2, .. }) => n1 == n2,
        (Expr::Deref { name: n1, .. }, Expr::Deref { name: n2, .. }) => n1 == n2,
        (Expr::Field { base: b1, field: f1, .. }, Expr::Field { base: b2, field: f2, .. }) => {
            b1 == b2 && f1 == f2
        }
        _ => false,
    }
}
