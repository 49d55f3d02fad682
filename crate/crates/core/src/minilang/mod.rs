//! Frontend for MiniLang, the small C-like language the analyses run on.
//!
//! MiniLang keeps just enough of C to express the kernel-style bug patterns
//! the pipeline cares about: opaque allocator calls, pointer copies, `->`
//! field access, null tests, and early returns. There is no preprocessor, no
//! casts, no arithmetic, no arrays, and no function pointers. Files use the
//! `.mc` extension.
//!
//! Grammar (EBNF, `//` line comments and whitespace elided):
//!
//! ```text
//! module    = { function } ;
//! function  = type IDENT "(" [ param { "," param } ] ")" "{" { stmt } "}" ;
//! param     = type IDENT ;
//! type      = ( "int" | "void" ) { "*" } ;
//! stmt      = decl | assign | callstmt | if | while | return | block ;
//! decl      = type IDENT [ "=" expr ] ";" ;
//! assign    = lvalue "=" expr ";" ;
//! lvalue    = IDENT | "*" IDENT | IDENT "->" IDENT ;
//! callstmt  = call ";" ;
//! if        = "if" "(" cond ")" stmt [ "else" stmt ] ;
//! while     = "while" "(" cond ")" stmt ;
//! return    = "return" [ expr ] ";" ;
//! block     = "{" { stmt } "}" ;
//! cond      = "!" expr | expr ( "==" | "!=" ) expr | expr ;
//! expr      = INT | "NULL" | IDENT | call | "&" IDENT | "*" IDENT
//!           | IDENT "->" IDENT ;
//! call      = IDENT "(" [ expr { "," expr } ] ")" ;
//! INT       = [ "-" ] DIGIT { DIGIT } ;
//! IDENT     = ( LETTER | "_" ) { LETTER | DIGIT | "_" } ;
//! ```
//!
//! Every AST node carries the 1-based source position of its first token.
//! Function definitions additionally record the line of their closing brace
//! so patch ingestion can slice whole function bodies out of a file.

mod ast;
pub mod generate;
mod lexer;
mod parser;
mod pretty;

pub use ast::{
    expr_eq, function_eq, module_eq, stmt_eq, BaseType, CallExpr, CmpOp, Cond, Expr, FunctionDef,
    LValue, Module, Param, Stmt, TypeName,
};
pub use parser::parse_module;
pub use pretty::{print_function, print_module};

/// Errors produced by [`parse_module`].
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
    Syntax { line: u32, col: u32, expected: String, found: String },
    #[error("lex error at {line}:{col}: {message}")]
    Lex { line: u32, col: u32, message: String },
    #[error("duplicate function name `{name}` at {line}:{col}")]
    DuplicateFunction { name: String, line: u32, col: u32 },
}
