use super::ast::*;
use super::lexer::{lex, SpannedTok, Tok};
use super::Diagnostic;
use crate::engine::AccessKind;
use crate::span::SourceSpan;

pub fn parse_checker(src: &str) -> Result<CheckerDef, Diagnostic> {
    let toks = lex(src)?;
    Parser { toks, pos: 0 }.checker()
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &SpannedTok {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> SpannedTok {
        let tok = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn err<T>(&self, expected: &str) -> Result<T, Diagnostic> {
        let found = self.peek();
        Err(Diagnostic::parse(
            format!("expected {expected}, found {}", found.tok.describe()),
            found.span,
        ))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<SourceSpan, Diagnostic> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            self.err(expected)
        }
    }

    fn ident(&mut self, expected: &str) -> Result<(String, SourceSpan), Diagnostic> {
        match &self.peek().tok {
            Tok::Ident(_) => {
                let spanned = self.bump();
                match spanned.tok {
                    Tok::Ident(name) => Ok((name, spanned.span)),
                    _ => unreachable!(),
                }
            }
            _ => self.err(expected),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<SourceSpan, Diagnostic> {
        match &self.peek().tok {
            Tok::Ident(name) if name == word => Ok(self.bump().span),
            _ => self.err(&format!("`{word}`")),
        }
    }

    fn at_keyword(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(name) if name == word)
    }

    fn string(&mut self, expected: &str) -> Result<(String, SourceSpan), Diagnostic> {
        match &self.peek().tok {
            Tok::Str(_) => {
                let spanned = self.bump();
                match spanned.tok {
                    Tok::Str(text) => Ok((text, spanned.span)),
                    _ => unreachable!(),
                }
            }
            _ => self.err(expected),
        }
    }

    fn integer(&mut self, expected: &str) -> Result<(i64, SourceSpan), Diagnostic> {
        match &self.peek().tok {
            Tok::Int(_) => {
                let spanned = self.bump();
                match spanned.tok {
                    Tok::Int(value) => Ok((value, spanned.span)),
                    _ => unreachable!(),
                }
            }
            _ => self.err(expected),
        }
    }

    fn checker(&mut self) -> Result<CheckerDef, Diagnostic> {
        let span = self.keyword("checker")?;
        let (name, _) = self.ident("checker name")?;
        self.expect(Tok::LBrace, "`{` after the checker name")?;
        let mut def = CheckerDef {
            name,
            maps: Vec::new(),
            uses_alias_map: false,
            templates: Vec::new(),
            handlers: Vec::new(),
            span,
        };
        loop {
            match &self.peek().tok {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(word) => match word.as_str() {
                    "map" => {
                        let decl = self.map_decl()?;
                        def.maps.push(decl);
                    }
                    "uses" => {
                        self.bump();
                        self.keyword("alias_map")?;
                        self.expect(Tok::Semi, "`;` after `uses alias_map`")?;
                        def.uses_alias_map = true;
                    }
                    "template" => {
                        let decl = self.template_decl()?;
                        if def.templates.iter().any(|t| t.name == decl.name) {
                            return Err(Diagnostic::parse(
                                format!("template `{}` already defined", decl.name),
                                decl.span,
                            ));
                        }
                        def.templates.push(decl);
                    }
                    "on" => {
                        let handler = self.handler()?;
                        def.handlers.push(handler);
                    }
                    _ => {
                        return self
                            .err("`map`, `uses`, `template`, `on`, or `}` in the checker body")
                    }
                },
                _ => return self.err("`map`, `uses`, `template`, `on`, or `}` in the checker body"),
            }
        }
        self.expect(Tok::Eof, "end of input after the checker")?;
        Ok(def)
    }

    fn map_decl(&mut self) -> Result<MapDecl, Diagnostic> {
        let span = self.keyword("map")?;
        let (name, _) = self.ident("map name")?;
        self.expect(Tok::LBrace, "`{` before the map's tags")?;
        let mut tags = Vec::new();
        loop {
            let (tag, _) = self.ident("tag name")?;
            tags.push(tag);
            match &self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                _ => return self.err("`,` or `}` in the tag list"),
            }
        }
        Ok(MapDecl { name, tags, span })
    }

    fn template_decl(&mut self) -> Result<TemplateDecl, Diagnostic> {
        let span = self.keyword("template")?;
        let (name, _) = self.ident("template name")?;
        self.expect(Tok::Assign, "`=` after the template name")?;
        let (text, _) = self.string("template text")?;
        self.expect(Tok::Semi, "`;` after the template text")?;
        Ok(TemplateDecl { name, text, span })
    }

    fn handler(&mut self) -> Result<Handler, Diagnostic> {
        let span = self.keyword("on")?;
        let (word, kind_span) = self.ident("event kind")?;
        let event = match word.as_str() {
            "post_call" => EventKind::PostCall,
            "pre_call" => EventKind::PreCall,
            "branch_condition" => EventKind::BranchCondition,
            "location" => EventKind::Location,
            "bind" => EventKind::Bind,
            "end_function" => EventKind::EndFunction,
            other => {
                return Err(Diagnostic::parse(
                    format!(
                        "unknown event `{other}` (expected `post_call`, `pre_call`, \
                         `branch_condition`, `location`, `bind`, or `end_function`)"
                    ),
                    kind_span,
                ));
            }
        };
        let mut guards = Vec::new();
        if self.at_keyword("where") {
            self.bump();
            loop {
                guards.push(self.guard()?);
                if self.peek().tok == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::LBrace, "`{` before the handler's actions")?;
        let mut actions = Vec::new();
        while self.peek().tok != Tok::RBrace {
            actions.push(self.action()?);
        }
        self.expect(Tok::RBrace, "`}` after the handler's actions")?;
        Ok(Handler { event, guards, actions, span })
    }

    fn guard(&mut self) -> Result<Guard, Diagnostic> {
        let (word, span) = self.ident("a guard")?;
        match word.as_str() {
            "callee_is" => {
                self.expect(Tok::LParen, "`(` after `callee_is`")?;
                let (name, _) = self.string("the callee name as a string")?;
                self.expect(Tok::RParen, "`)` after the callee name")?;
                Ok(Guard::CalleeIs { name, span })
            }
            "arg_count" => {
                self.expect(Tok::LParen, "`(` after `arg_count`")?;
                let (value, value_span) = self.integer("the argument count")?;
                if value < 0 {
                    return Err(Diagnostic::parse("argument count cannot be negative", value_span));
                }
                self.expect(Tok::RParen, "`)` after the argument count")?;
                Ok(Guard::ArgCount { count: value as usize, span })
            }
            "access_kind" => {
                self.expect(Tok::LParen, "`(` after `access_kind`")?;
                let (word, word_span) = self.ident("`load` or `store`")?;
                let kind = match word.as_str() {
                    "load" => AccessKind::Load,
                    "store" => AccessKind::Store,
                    other => {
                        return Err(Diagnostic::parse(
                            format!("unknown access kind `{other}` (expected `load` or `store`)"),
                            word_span,
                        ));
                    }
                };
                self.expect(Tok::RParen, "`)` after the access kind")?;
                Ok(Guard::AccessKind { kind, span })
            }
            "null_test_on" => {
                self.expect(Tok::LParen, "`(` after `null_test_on`")?;
                let (var, _) = self.ident("a variable to bind")?;
                self.expect(Tok::RParen, "`)` after the variable")?;
                Ok(Guard::NullTestOn { var, span })
            }
            "state_is" => {
                self.expect(Tok::LParen, "`(` after `state_is`")?;
                let (map, _) = self.ident("a map name")?;
                self.expect(Tok::Comma, "`,` after the map name")?;
                let region = self.region_expr()?;
                self.expect(Tok::Comma, "`,` after the region")?;
                let (tag, _) = self.ident("a tag name")?;
                self.expect(Tok::RParen, "`)` after the tag")?;
                Ok(Guard::StateIs { map, region, tag, span })
            }
            other => Err(Diagnostic::parse(
                format!(
                    "unknown guard `{other}` (expected `callee_is`, `arg_count`, \
                     `access_kind`, `null_test_on`, or `state_is`)"
                ),
                span,
            )),
        }
    }

    fn action(&mut self) -> Result<Action, Diagnostic> {
        let (word, span) = self.ident("an action")?;
        let action = match word.as_str() {
            "set_state" => {
                self.expect(Tok::LParen, "`(` after `set_state`")?;
                let (map, _) = self.ident("a map name")?;
                self.expect(Tok::Comma, "`,` after the map name")?;
                let region = self.region_expr()?;
                self.expect(Tok::Comma, "`,` after the region")?;
                let (tag, _) = self.ident("a tag name")?;
                self.expect(Tok::RParen, "`)` after the tag")?;
                Action::SetState { map, region, tag, span }
            }
            "clear_state" => {
                self.expect(Tok::LParen, "`(` after `clear_state`")?;
                let (map, _) = self.ident("a map name")?;
                self.expect(Tok::Comma, "`,` after the map name")?;
                let region = self.region_expr()?;
                self.expect(Tok::RParen, "`)` after the region")?;
                Action::ClearState { map, region, span }
            }
            "propagate_alias" => {
                self.expect(Tok::LParen, "`(` after `propagate_alias`")?;
                let lhs = self.region_expr()?;
                self.expect(Tok::Comma, "`,` between the regions")?;
                let rhs = self.region_expr()?;
                self.expect(Tok::RParen, "`)` after the regions")?;
                Action::PropagateAlias { lhs, rhs, span }
            }
            "mark_all_aliases" => {
                self.expect(Tok::LParen, "`(` after `mark_all_aliases`")?;
                let (map, _) = self.ident("a map name")?;
                self.expect(Tok::Comma, "`,` after the map name")?;
                let region = self.region_expr()?;
                self.expect(Tok::Comma, "`,` after the region")?;
                let (tag, _) = self.ident("a tag name")?;
                self.expect(Tok::RParen, "`)` after the tag")?;
                Action::MarkAllAliases { map, region, tag, span }
            }
            "report" => {
                self.expect(Tok::LParen, "`(` after `report`")?;
                let (template, _) = self.ident("a template name")?;
                self.expect(Tok::Comma, "`,` after the template name")?;
                let region = self.region_expr()?;
                self.expect(Tok::RParen, "`)` after the region")?;
                Action::Report { template, region, span }
            }
            other => {
                return Err(Diagnostic::parse(
                    format!(
                        "unknown action `{other}` (expected `set_state`, `clear_state`, \
                         `propagate_alias`, `mark_all_aliases`, or `report`)"
                    ),
                    span,
                ));
            }
        };
        self.expect(Tok::Semi, "`;` after the action")?;
        Ok(action)
    }

    fn region_expr(&mut self) -> Result<RegionExpr, Diagnostic> {
        let (word, span) = self.ident("a region expression")?;
        match word.as_str() {
            "arg_region" => {
                self.expect(Tok::LParen, "`(` after `arg_region`")?;
                let (value, value_span) = self.integer("the argument index")?;
                if value < 0 {
                    return Err(Diagnostic::parse("argument index cannot be negative", value_span));
                }
                self.expect(Tok::RParen, "`)` after the argument index")?;
                Ok(RegionExpr::ArgRegion { index: value as usize, span })
            }
            "return_region" => Ok(RegionExpr::ReturnRegion { span }),
            "base_region" => Ok(RegionExpr::BaseRegion { span }),
            "lhs" => Ok(RegionExpr::Lhs { span }),
            "rhs" => Ok(RegionExpr::Rhs { span }),
            _ => Ok(RegionExpr::Var { name: word, span }),
        }
    }
}
