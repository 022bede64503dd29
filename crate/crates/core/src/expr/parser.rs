//! Recursive-descent parser for the expression language.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^` (right-associative).
//! There is no implicit multiplication: `u cos(a)` is rejected.

use super::ast::{BinOp, Constant, Expr, Func};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedToken { found: String },
    UnknownFunction { name: String },
    InvalidNumber { text: String },
}

/// A syntax error. `offset` is a byte offset into the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::EmptyInput => write!(f, "empty expression")?,
            ParseErrorKind::UnexpectedToken { found } => {
                write!(f, "unexpected {found} at offset {}", self.offset)?
            }
            ParseErrorKind::UnknownFunction { name } => {
                write!(f, "unknown function `{name}` at offset {}", self.offset)?
            }
            ParseErrorKind::InvalidNumber { text } => {
                write!(f, "invalid number `{text}` at offset {}", self.offset)?
            }
        }
        if !self.expected.is_empty() {
            write!(f, "; expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::End => "end of input".to_string(),
        }
    }
}

const OPERAND: &[&str] = &["number", "identifier", "`(`", "`-`"];
const AFTER_OPERAND: &[&str] = &["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                kind: ParseErrorKind::InvalidNumber {
                    text: text.to_string(),
                },
                expected: vec![],
            })?;
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::UnexpectedToken {
                            found: format!("character `{ch}`"),
                        },
                        expected: OPERAND.to_vec(),
                    });
                }
            };
            i += 1;
            out.push((start, tok));
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::UnexpectedToken {
                found: self.peek().describe(),
            },
            expected: expected.to_vec(),
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            // The exponent may itself carry a sign: `x^-2`.
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.additive()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Tok::LParen = self.peek() {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownFunction { name: name.clone() },
                        expected: vec!["sin", "cos", "exp", "ln", "sqrt"],
                    })?;
                    self.bump();
                    let arg = self.additive()?;
                    self.expect_rparen()?;
                    return Ok(Expr::call(func, arg));
                }
                if Func::from_name(&name).is_some() {
                    return Err(self.unexpected(&["`(`"]));
                }
                Ok(match Constant::from_name(&name) {
                    Some(c) => Expr::Const(c),
                    None => Expr::Var(name),
                })
            }
            _ => Err(self.unexpected(OPERAND)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if let Tok::RParen = self.peek() {
            self.bump();
            Ok(())
        } else {
            let mut expected = vec!["`)`"];
            expected.extend_from_slice(&AFTER_OPERAND[..5]);
            Err(self.unexpected(&expected))
        }
    }
}

/// Parses `text` into an [`Expr`].
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::EmptyInput,
            expected: OPERAND.to_vec(),
        });
    }
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let expr = parser.additive()?;
    if *parser.peek() != Tok::End {
        return Err(parser.unexpected(AFTER_OPERAND));
    }
    Ok(expr)
}
