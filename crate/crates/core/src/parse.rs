//! Polynomial expression parser.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { "*" unary } ;
//! unary   = "-" unary | "+" unary | power ;
//! power   = atom [ "^" integer ] ;
//! atom    = integer | variable | "(" expr ")" ;
//! integer = digit { digit } ;
//! variable = (letter | "_") { letter | digit | "_" } ;
//! ```
//!
//! Integer literals are reduced mod p; exponents are plain non-negative integers.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::poly::{Monomial, PolyRing, Polynomial, MAX_EXPONENT};

pub fn parse_polynomial(text: &str, ring: &Arc<PolyRing>) -> Result<Polynomial> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, ring };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err(format!("unexpected character {:?}", p.src[p.pos] as char)));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: &'a Arc<PolyRing>,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.unary()?;
            let at = self.pos;
            acc = acc.mul(&rhs).map_err(|e| Error::Parse { pos: at, msg: e.to_string() })?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        let digits = self.digits();
        if digits.is_empty() {
            return Err(self.err("expected exponent after '^'"));
        }
        let exp: u64 = match digits.parse::<u64>() {
            Ok(v) if v <= MAX_EXPONENT => v,
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("exponent {digits} exceeds {MAX_EXPONENT}"),
                })
            }
        };
        // a single term raises exactly; general bases go through repeated squaring
        if base.len() == 1 {
            let (m, c) = base.leading_term().unwrap();
            let m = m.checked_pow(exp).map_err(|e| Error::Parse { pos: start, msg: e.to_string() })?;
            let c = base.field().pow(c, exp);
            return Ok(self.ring.term(c, m));
        }
        base.pow(exp).map_err(|e| Error::Parse { pos: start, msg: e.to_string() })
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.digits();
                let v: BigInt = digits.parse().expect("ascii digits");
                Ok(self.ring.constant(self.ring.field().from_bigint(&v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match self.ring.var_index(name) {
                    Some(i) => Ok(self.ring.monomial(Monomial::var_power(self.ring.nvars(), i, 1))),
                    None => Err(Error::Parse { pos: start, msg: format!("unknown variable {name:?}") }),
                }
            }
            Some(c) => Err(self.err(format!("unexpected character {:?}", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
