use super::Diagnostic;
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Assign,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("`{name}`"),
            Tok::Int(value) => format!("`{value}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Assign => "`=`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpannedTok {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn lex(src: &str) -> Result<Vec<SpannedTok>, Diagnostic> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = SourceSpan::new(line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '/' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                        col += 1;
                    }
                } else {
                    return Err(Diagnostic::parse("stray `/` (only `//` comments)", span));
                }
            }
            '"' => {
                chars.next();
                col += 1;
                let mut text = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            col += 1;
                            match chars.next() {
                                Some('"') => {
                                    col += 1;
                                    text.push('"');
                                }
                                Some('\\') => {
                                    col += 1;
                                    text.push('\\');
                                }
                                other => {
                                    return Err(Diagnostic::parse(
                                        format!(
                                            "unsupported escape `\\{}`",
                                            other.map(String::from).unwrap_or_default()
                                        ),
                                        SourceSpan::new(line, col),
                                    ));
                                }
                            }
                        }
                        Some('\n') | None => {
                            return Err(Diagnostic::parse("unterminated string literal", span));
                        }
                        Some(c) => {
                            col += 1;
                            text.push(c);
                        }
                    }
                }
                out.push(SpannedTok { tok: Tok::Str(text), span });
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let value = text.parse::<i64>().map_err(|_| {
                    Diagnostic::parse(format!("integer literal `{text}` out of range"), span)
                })?;
                out.push(SpannedTok { tok: Tok::Int(value), span });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(SpannedTok { tok: Tok::Ident(text), span });
            }
            _ => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Assign,
                    other => {
                        return Err(Diagnostic::parse(
                            format!("unexpected character `{other}`"),
                            span,
                        ));
                    }
                };
                chars.next();
                col += 1;
                out.push(SpannedTok { tok, span });
            }
        }
    }
    out.push(SpannedTok { tok: Tok::Eof, span: SourceSpan::new(line, col) });
    Ok(out)
}
