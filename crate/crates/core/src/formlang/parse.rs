//! Recursive-descent parser for the scalar expression grammar.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = atom [ "^" unary ] ;
//! atom    = number | "i" | "pi" | variable | func "(" expr ")" | "(" expr ")" ;
//! variable = "x" digit { digit } ;            (* x1 .. xm *)
//! func    = "sin" | "cos" | "exp" | "log" | "sqrt" | "re" | "im" | "conj" ;
//! number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! `^` binds tighter than unary minus and associates to the right, so
//! `-x1^2` is `-(x1^2)` and `2^3^2` is `2^(3^2)`.

use thiserror::Error;

use super::ast::{BinOp, Func, Node, ScalarExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable x{index} at offset {offset} exceeds arity {arity}")]
    VariableOutOfRange { offset: usize, index: usize, arity: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::VariableOutOfRange { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

const OPERAND: [&str; 4] = ["number", "identifier", "`(`", "`-`"];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == '.' {
            let bytes = rest.as_bytes();
            let mut end = 0;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end < bytes.len() && bytes[end] == b'.' {
                end += 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &rest[..end];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                found: format!("malformed number `{text}`"),
                expected: vec!["number"],
            })?;
            self.pos += end;
            return Ok((Tok::Num(value), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos += end;
            return Ok((Tok::Ident(rest[..end].to_string()), start));
        }
        if "+-*/^()".contains(c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        Err(ParseError::Syntax {
            offset: start,
            found: format!("character `{c}`"),
            expected: OPERAND.to_vec(),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    offset: usize,
    arity: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, offset) = self.lexer.next()?;
        self.tok = tok;
        self.offset = offset;
        Ok(())
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset,
            found: self.tok.describe(),
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.tok != Tok::Sym(')') {
            return Err(self.error(&["`)`", "operator"]));
        }
        self.bump()
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Node::Num(v))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let offset = self.offset;
                self.bump()?;
                self.identifier(name, offset)
            }
            _ => Err(self.error(&OPERAND)),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        match name.as_str() {
            "i" => return Ok(Node::ImagUnit),
            "pi" => return Ok(Node::Pi),
            _ => {}
        }
        if let Some(func) = Func::from_name(&name) {
            if self.tok != Tok::Sym('(') {
                return Err(self.error(&["`(`"]));
            }
            self.bump()?;
            let arg = self.expr()?;
            self.expect_close()?;
            return Ok(Node::Call(func, Box::new(arg)));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) && !digits.starts_with('0') {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index > self.arity {
                    return Err(ParseError::VariableOutOfRange {
                        offset,
                        index,
                        arity: self.arity,
                    });
                }
                return Ok(Node::Var(index - 1));
            }
        }
        Err(ParseError::UnknownIdentifier { offset, name })
    }
}

/// Parses `text` as an expression in the coordinates `x1..x{arity}`.
pub fn parse(text: &str, arity: usize) -> Result<ScalarExpr, ParseError> {
    let mut parser = Parser {
        lexer: Lexer { src: text, pos: 0 },
        tok: Tok::End,
        offset: 0,
        arity,
    };
    parser.bump()?;
    let node = parser.expr()?;
    if parser.tok != Tok::End {
        return Err(parser.error(&["operator", "end of input"]));
    }
    Ok(ScalarExpr::from_node(node, arity).expect("parser checks variable indices"))
}
