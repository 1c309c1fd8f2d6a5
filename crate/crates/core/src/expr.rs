//! Parser for the textual expression syntax.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' ['-'] int | '^' '(' ['-'] int ')')?
//! atom   := int | ident ['_' jet] | '(' expr ')'
//! jet    := 'x'+ | 'x' digits
//! ```
//!
//! Identifiers must name coordinates of the target [`Space`]. Division and
//! negative powers are accepted only when the divisor is free of jets, so every
//! expression denotes a differential polynomial with rational coefficients.
//! Columns in errors are 1-based character positions.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::algebra::{RatFn, Rational};
use crate::error::{Error, Result};
use crate::jet::{DiffPoly, Space};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident { name: String, order: usize },
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

impl Lexer {
    fn lex(src: &str) -> Result<Lexer> {
        let chars: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Int(s.parse().unwrap()), pos));
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                let mut order = 0;
                if i < chars.len() && chars[i] == '_' {
                    i += 1;
                    let s0 = i;
                    while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let suffix: String = chars[s0..i].iter().collect();
                    order = jet_order(&suffix).ok_or_else(|| err(s0 + 1, format!("bad jet suffix `_{suffix}`")))?;
                }
                toks.push((Tok::Ident { name, order }, pos));
            } else if "+-*/^()".contains(c) {
                toks.push((Tok::Op(c), pos));
                i += 1;
            } else {
                return Err(err(pos, format!("unexpected character `{c}`")));
            }
        }
        toks.push((Tok::End, chars.len() + 1));
        Ok(Lexer { toks })
    }
}

fn jet_order(suffix: &str) -> Option<usize> {
    if !suffix.is_empty() && suffix.chars().all(|c| c == 'x') {
        return Some(suffix.len());
    }
    let digits = suffix.strip_prefix('x')?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&k: &usize| k >= 1)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    at: usize,
    space: &'a Arc<Space>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        self.at += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(err(self.pos(), format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<DiffPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<DiffPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    let d = d.as_ratfn().ok_or_else(|| err(pos, "division by an expression containing jet variables"))?;
                    let inv = d.inv().map_err(|_| err(pos, "division by zero"))?;
                    acc = acc.mul_ratfn(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<DiffPoly> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        let paren = *self.peek() == Tok::Op('(');
        if paren {
            self.bump();
        }
        let neg = *self.peek() == Tok::Op('-');
        if neg {
            self.bump();
        }
        let pos = self.pos();
        let k = match self.bump() {
            Tok::Int(k) => i64::try_from(k).map_err(|_| err(pos, "exponent too large"))?,
            _ => return Err(err(pos, "expected an integer exponent")),
        };
        if k > u32::MAX as i64 {
            return Err(err(pos, "exponent too large"));
        }
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -k } else { k })
    }

    fn power(&mut self) -> Result<DiffPoly> {
        let base_pos = self.pos();
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let e = self.exponent()?;
        if e >= 0 {
            return Ok(base.pow(e as u32));
        }
        let b = base.as_ratfn().ok_or_else(|| err(base_pos, "negative power of an expression containing jet variables"))?;
        let r = b.pow(e as i32).map_err(|_| err(base_pos, "negative power of zero"))?;
        Ok(DiffPoly::from_ratfn(self.space, r))
    }

    fn atom(&mut self) -> Result<DiffPoly> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(k) => Ok(DiffPoly::constant(self.space, Rational::from_bigint(k))),
            Tok::Ident { name, order } => {
                let comp = self.space.base().index_of(&name).ok_or_else(|| err(pos, format!("unknown coordinate `{name}`")))?;
                DiffPoly::jet(self.space, comp, order).map_err(|e| err(pos, e.to_string()))
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => Err(err(pos, "unexpected end of input")),
            Tok::Op(c) => Err(err(pos, format!("unexpected `{c}`"))),
        }
    }
}

/// Parses a differential polynomial over `space`.
pub fn parse_diffpoly(space: &Arc<Space>, src: &str) -> Result<DiffPoly> {
    let lx = Lexer::lex(src)?;
    let mut p = Parser { toks: &lx.toks, at: 0, space };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(err(p.pos(), "trailing input"));
    }
    Ok(e)
}

/// Parses a jet-free expression as a rational function of the coordinates.
pub fn parse_ratfn(space: &Arc<Space>, src: &str) -> Result<RatFn> {
    let e = parse_diffpoly(space, src)?;
    e.as_ratfn().ok_or_else(|| err(1, "expected an expression without jet variables"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::DEFAULT_JET_BOUND;

    fn sp() -> Arc<Space> {
        Space::new(["u1", "u2", "u3"], DEFAULT_JET_BOUND)
    }

    #[test]
    fn precedence_and_unary_minus() {
        let s = sp();
        let a = parse_diffpoly(&s, "-u1^2 + 2*u2 - (u3 - 1)").unwrap();
        let b = parse_diffpoly(&s, "1 - u3 + u2*2 - u1*u1").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_ratfn(&s, "1/2/u1").unwrap(), parse_ratfn(&s, "(2*u1)^-1").unwrap());
    }

    #[test]
    fn jets_and_rational_coefficients() {
        let s = sp();
        let e = parse_diffpoly(&s, "-1/(u1-u2)^2*u1_x*u2_xx + u3_x4").unwrap();
        assert_eq!(e.order(), 4);
        assert_eq!(parse_diffpoly(&s, &e.to_string()).unwrap(), e);
    }

    #[test]
    fn errors_carry_positions() {
        let s = sp();
        assert_eq!(parse_diffpoly(&s, "u1 + v").unwrap_err(), Error::Parse { pos: 6, msg: "unknown coordinate `v`".into() });
        assert!(matches!(parse_diffpoly(&s, "u1/u2_x"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_diffpoly(&s, "u1_x^-1"), Err(Error::Parse { pos: 1, .. })));
        assert!(matches!(parse_diffpoly(&s, "u1/(u2-u2)"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_diffpoly(&s, "(u1"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_diffpoly(&s, "u1 u2"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_diffpoly(&s, "u1_y"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_diffpoly(&s, "u1 # 2"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_diffpoly(&s, "u1_x9"), Err(Error::Parse { pos: 1, .. })));
    }
}
