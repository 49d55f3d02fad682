use crate::span::SourceSpan;

use super::ast::*;
use super::lexer::{lex, SpannedTok, Tok};
use super::ParseError;

pub fn parse_module(src: &str) -> Result<Module, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let module = p.module()?;
    let mut seen = std::collections::HashSet::new();
    for f in &module.functions {
        if !seen.insert(f.name.clone()) {
            return Err(ParseError::DuplicateFunction {
                name: f.name.clone(),
                line: f.span.line,
                col: f.span.col,
            });
        }
    }
    Ok(module)
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> SpannedTok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        let at = &self.toks[self.pos];
        ParseError::Syntax {
            line: at.span.line,
            col: at.span.col,
            expected: expected.into(),
            found: at.tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<SpannedTok, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.err(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let sp = self.span();
                self.bump();
                Ok((name, sp))
            }
            _ => Err(self.err(expected)),
        }
    }

    fn module(&mut self) -> Result<Module, ParseError> {
        let mut functions = Vec::new();
        while *self.peek() != Tok::Eof {
            functions.push(self.function()?);
        }
        Ok(Module { functions })
    }

    fn type_name(&mut self) -> Result<TypeName, ParseError> {
        let base = match self.peek() {
            Tok::KwInt => BaseType::Int,
            Tok::KwVoid => BaseType::Void,
            _ => return Err(self.err("a type (`int` or `void`)")),
        };
        self.bump();
        let mut ptr_depth = 0u8;
        while *self.peek() == Tok::Star {
            self.bump();
            ptr_depth += 1;
        }
        Ok(TypeName { base, ptr_depth })
    }

    fn function(&mut self) -> Result<FunctionDef, ParseError> {
        let start = self.span();
        let ret = self.type_name()?;
        let (name, _) = self.ident("a function name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let psp = self.span();
                let ty = self.type_name()?;
                let (pname, _) = self.ident("a parameter name")?;
                params.push(Param { ty, name: pname, span: psp });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut body = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.err("`}` closing the function body"));
            }
            body.push(self.stmt()?);
        }
        let close = self.bump();
        Ok(FunctionDef { ret, name, params, body, span: start, end_line: close.span.line })
    }

    fn block(&mut self) -> Result<Stmt, ParseError> {
        let start = self.span();
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.err("`}` closing the block"));
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Stmt::Block { stmts, span: start })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::KwInt | Tok::KwVoid => {
                let ty = self.type_name()?;
                let (name, _) = self.ident("a variable name")?;
                let init = if *self.peek() == Tok::Assign {
                    self.bump();
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt::Decl { ty, name, init, span: sp })
            }
            Tok::Star => {
                self.bump();
                let (name, _) = self.ident("a pointer name after `*`")?;
                self.expect(Tok::Assign, "`=`")?;
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt::Assign { target: LValue::Deref { name, span: sp }, value, span: sp })
            }
            Tok::KwIf => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.cond()?;
                self.expect(Tok::RParen, "`)`")?;
                let then_branch = Box::new(self.stmt()?);
                let else_branch = if *self.peek() == Tok::KwElse {
                    self.bump();
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                Ok(Stmt::If { cond, then_branch, else_branch, span: sp })
            }
            Tok::KwWhile => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.cond()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = Box::new(self.stmt()?);
                Ok(Stmt::While { cond, body, span: sp })
            }
            Tok::KwReturn => {
                self.bump();
                let value = if *self.peek() == Tok::Semi { None } else { Some(self.expr()?) };
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt::Return { value, span: sp })
            }
            Tok::LBrace => self.block(),
            Tok::Ident(name) => {
                match self.peek2() {
                    Tok::LParen => {
                        let call = self.call_expr()?;
                        self.expect(Tok::Semi, "`;`")?;
                        Ok(Stmt::Call { call, span: sp })
                    }
                    Tok::Arrow => {
                        self.bump();
                        self.bump();
                        let (field, _) = self.ident("a field name after `->`")?;
                        self.expect(Tok::Assign, "`=`")?;
                        let value = self.expr()?;
                        self.expect(Tok::Semi, "`;`")?;
                        Ok(Stmt::Assign {
                            target: LValue::Field { base: name, field, span: sp },
                            value,
                            span: sp,
                        })
                    }
                    Tok::Assign => {
                        self.bump();
                        self.bump();
                        let value = self.expr()?;
                        self.expect(Tok::Semi, "`;`")?;
                        Ok(Stmt::Assign {
                            target: LValue::Var { name, span: sp },
                            value,
                            span: sp,
                        })
                    }
                    _ => {
                        self.bump();
                        Err(self.err("`(`, `->`, or `=` after the identifier"))
                    }
                }
            }
            _ => Err(self.err("a statement")),
        }
    }

    fn cond(&mut self) -> Result<Cond, ParseError> {
        let sp = self.span();
        if *self.peek() == Tok::Bang {
            self.bump();
            let expr = self.expr()?;
            return Ok(Cond::Not { expr, span: sp });
        }
        let lhs = self.expr()?;
        match self.peek() {
            Tok::EqEq => {
                self.bump();
                let rhs = self.expr()?;
                Ok(Cond::Cmp { lhs, op: CmpOp::Eq, rhs, span: sp })
            }
            Tok::NotEq => {
                self.bump();
                let rhs = self.expr()?;
                Ok(Cond::Cmp { lhs, op: CmpOp::Ne, rhs, span: sp })
            }
            Tok::RParen => Ok(Cond::Truthy { expr: lhs, span: sp }),
            _ => Err(self.err("`==`, `!=`, or `)` in the condition")),
        }
    }

    fn call_expr(&mut self) -> Result<CallExpr, ParseError> {
        let sp = self.span();
        let (callee, _) = self.ident("a function name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(CallExpr { callee, args, span: sp })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Int(value) => {
                self.bump();
                Ok(Expr::Int { value, span: sp })
            }
            Tok::KwNull => {
                self.bump();
                Ok(Expr::Null { span: sp })
            }
            Tok::Amp => {
                self.bump();
                let (name, _) = self.ident("a variable name after `&`")?;
                Ok(Expr::AddrOf { name, span: sp })
            }
            Tok::Star => {
                self.bump();
                let (name, _) = self.ident("a pointer name after `*`")?;
                Ok(Expr::Deref { name, span: sp })
            }
            Tok::Ident(name) => match self.peek2() {
                Tok::LParen => Ok(Expr::Call(self.call_expr()?)),
                Tok::Arrow => {
                    self.bump();
                    self.bump();
                    let (field, _) = self.ident("a field name after `->`")?;
                    Ok(Expr::Field { base: name, field, span: sp })
                }
                _ => {
                    self.bump();
                    Ok(Expr::Var { name, span: sp })
                }
            },
            _ => Err(self.err("an expression")),
        }
    }
}
