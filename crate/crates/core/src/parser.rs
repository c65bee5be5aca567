//! Recursive-descent parser for polynomial text.
//!
//! ```text
//! expr   := ['-'|'+'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := var | int ('/' uint)? | '(' expr ')'
//! var    := 'x' | 'y' | 'z'
//! ```
//!
//! Whitespace is insignificant. The canonical printer only emits the
//! parenthesis-free subset.

use thiserror::Error;

use crate::field::{Field, FieldError};
use crate::poly::{Poly, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("bad coefficient at {pos}: {source}")]
    Coefficient { pos: usize, source: FieldError },
}

pub fn parse_poly(text: &str, field: Field) -> Result<Poly, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        field,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: Field,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let first = self.term()?;
        let mut acc = if negate { -first } else { first };
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.syntax("expected exponent"));
            }
            let e: u32 = digits
                .parse()
                .map_err(|_| self.syntax("exponent out of range"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let num = self.digits();
                let mut text = num;
                if self.eat(b'/') {
                    self.skip_ws();
                    let den = self.digits();
                    if den.is_empty() {
                        return Err(self.syntax("expected denominator"));
                    }
                    text = format!("{text}/{den}");
                }
                let c = self
                    .field
                    .parse_scalar(&text)
                    .map_err(|source| ParseError::Coefficient { pos: start, source })?;
                Ok(Poly::constant(c))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                let v = match name.as_str() {
                    "x" => Var::X,
                    "y" => Var::Y,
                    "z" => Var::Z,
                    _ => return Err(ParseError::UnknownVariable { pos: start, name }),
                };
                Ok(Poly::var(self.field, v))
            }
            Some(_) => Err(self.syntax("expected variable, number or `(`")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}
