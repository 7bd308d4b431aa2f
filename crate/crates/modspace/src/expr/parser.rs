//! Recursive descent parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, `* /`, unary `-`, `^`
//! (right-associative, constant exponent only), atoms. Multiplication by
//! juxtaposition is not allowed; `2x` is a syntax error.

use super::{BinaryOp, Expr, Func, UnaryOp, MAX_DEPTH};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("number out of range at offset {offset}")]
    NumberOutOfRange { offset: usize },
    #[error("power exponent at offset {offset} is not a constant")]
    NonConstantExponent { offset: usize },
    #[error("division by constant zero at offset {offset}")]
    DivisionByZero { offset: usize },
    #[error("expression nests deeper than {MAX_DEPTH} levels")]
    TooDeep,
}

impl ParseError {
    /// Byte offset of the error within the source.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::NumberOutOfRange { offset }
            | ParseError::NonConstantExponent { offset }
            | ParseError::DivisionByZero { offset } => *offset,
            ParseError::TooDeep => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' => {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                    self.pos += 1;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
                if self.pos < self.src.len() && (self.src[self.pos] | 32) == b'e' {
                    let mark = self.pos;
                    self.pos += 1;
                    if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                        self.pos += 1;
                    }
                    if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    } else {
                        // `1e` not followed by digits: the `e` belongs to
                        // whatever comes next.
                        self.pos = mark;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::NumberOutOfRange { offset: start })?;
                if !value.is_finite() {
                    return Err(ParseError::NumberOutOfRange { offset: start });
                }
                Tok::Number(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: "a token".into(),
                    found: format!("'{}'", other as char),
                })
            }
        };
        Ok((tok, start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_offset: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, tok_offset) = lexer.next()?;
        Ok(Parser {
            lexer,
            tok,
            tok_offset,
        })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, offset) = self.lexer.next()?;
        self.tok = tok;
        self.tok_offset = offset;
        Ok(())
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.tok_offset,
            expected: expected.into(),
            found: self.tok.describe(),
        }
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep);
        }
        let mut lhs = self.term(depth + 1)?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.advance()?;
            let rhs = self.term(depth + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep);
        }
        let mut lhs = self.unary(depth + 1)?;
        loop {
            let (op, op_offset) = match self.tok {
                Tok::Star => (BinaryOp::Mul, self.tok_offset),
                Tok::Slash => (BinaryOp::Div, self.tok_offset),
                _ => break,
            };
            self.advance()?;
            let rhs = self.unary(depth + 1)?;
            if op == BinaryOp::Div && rhs.is_zero() {
                return Err(ParseError::DivisionByZero { offset: op_offset });
            }
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep);
        }
        if self.tok == Tok::Minus {
            self.advance()?;
            let inner = self.unary(depth + 1)?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power(depth + 1)
    }

    fn power(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep);
        }
        let base = self.atom(depth + 1)?;
        if self.tok == Tok::Caret {
            let caret_offset = self.tok_offset;
            self.advance()?;
            let exp = self.unary(depth + 1)?;
            let value = fold_constant(&exp)
                .ok_or(ParseError::NonConstantExponent { offset: caret_offset })?;
            return Ok(Expr::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(Expr::Constant(value)),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep);
        }
        match self.tok.clone() {
            Tok::Number(v) => {
                self.advance()?;
                Ok(Expr::Constant(v))
            }
            Tok::Ident(name) => {
                let name_offset = self.tok_offset;
                self.advance()?;
                if self.tok == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        offset: name_offset,
                        name: name.clone(),
                    })?;
                    self.advance()?;
                    let arg = self.expr(depth + 1)?;
                    if self.tok != Tok::RParen {
                        return Err(self.error("')'"));
                    }
                    self.advance()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Variable(name))
                }
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr(depth + 1)?;
                if self.tok != Tok::RParen {
                    return Err(self.error("')'"));
                }
                self.advance()?;
                Ok(inner)
            }
            _ => Err(self.error("number, identifier, '-', or '('")),
        }
    }
}

/// Fold a constant-only subtree to its value. Used for `^` exponents.
fn fold_constant(e: &Expr) -> Option<f64> {
    match e {
        Expr::Constant(v) => Some(*v),
        Expr::Variable(_) => None,
        Expr::Unary(UnaryOp::Neg, a) => Some(-fold_constant(a)?),
        Expr::Binary(op, a, b) => {
            let x = fold_constant(a)?;
            let y = fold_constant(b)?;
            Some(match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                BinaryOp::Mul => x * y,
                BinaryOp::Div => x / y,
                BinaryOp::Pow => x.powf(y),
            })
        }
        Expr::Call(f, a) => Some(f.apply(fold_constant(a)?)),
    }
}

/// Parse an expression.
///
/// Errors carry the byte offset into `source` and the expected token set;
/// unknown *symbols* are not errors here — they surface when the expression
/// is bound against a variable list (compilation or evaluation).
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.expr(0)?;
    if p.tok != Tok::End {
        return Err(p.error("end of input or an operator"));
    }
    Ok(e)
}
