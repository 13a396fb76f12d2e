//! Text literals for field elements and Laurent polynomials.
//!
//! ```text
//! expr   := [sign] term (sign term)*
//! term   := factor ('*'? factor)*  |  'O' '(' 'T' '^' int ')'
//! factor := int | 'b' ['^' int] | 'T' ['^' int] | 'U' ['^' int] | '(' expr ')'
//! ```
//!
//! Exponents may be written `T^-1`, `T^(-1)` or `T^{-1}`. `T^j` denotes
//! `U^{e j}` in a tower of ramification `e`; `U` is accepted only when `e > 1`.

use std::collections::BTreeMap;

use crate::coeffield::{FqElement, Field};
use crate::error::{Error, Result};

/// Sparse Laurent polynomial keyed by exponent in `U`-units.
pub(crate) type LaurentPoly = BTreeMap<i64, FqElement>;

pub(crate) struct Parsed {
    pub terms: LaurentPoly,
    /// Horizon from a trailing `O(T^M)` term, in `U`-units.
    pub big_o: Option<i64>,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: &'a Field,
    ram: i64,
    allow_series: bool,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos, msg: msg.into() })
}

fn poly_add(a: &mut LaurentPoly, exp: i64, c: &FqElement) {
    let entry = a.entry(exp).or_insert_with(|| c.field().zero());
    *entry = entry.add(c).expect("same field");
    if entry.is_zero() {
        a.remove(&exp);
    }
}

fn poly_mul(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    let mut out = LaurentPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            poly_add(&mut out, ea + eb, &ca.mul(cb).expect("same field"));
        }
    }
    out
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            err(self.pos, format!("expected '{}'", c as char))
        }
    }

    fn uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return err(start, "expected integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<u64>()
            .or_else(|_| err(start, "integer out of range"))
    }

    fn signed_exponent(&mut self) -> Result<i64> {
        let close = match self.peek() {
            Some(b'(') => Some(b')'),
            Some(b'{') => Some(b'}'),
            _ => None,
        };
        if close.is_some() {
            self.pos += 1;
        }
        let neg = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let start = self.pos;
        let v = self.uint()?;
        let v = i64::try_from(v).or_else(|_| err(start, "exponent out of range"))?;
        if let Some(c) = close {
            self.expect(c)?;
        }
        Ok(if neg { -v } else { v })
    }

    fn optional_exponent(&mut self) -> Result<i64> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.signed_exponent()
        } else {
            Ok(1)
        }
    }

    fn starts_factor(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || matches!(c, b'b' | b'T' | b'U' | b'('))
    }

    fn constant(&self, c: FqElement) -> LaurentPoly {
        let mut out = LaurentPoly::new();
        if !c.is_zero() {
            out.insert(0, c);
        }
        out
    }

    fn factor(&mut self) -> Result<LaurentPoly> {
        let pos = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                Ok(self.constant(self.field.from_int((n % self.field.p() as u64) as i64)))
            }
            Some(b'b') => {
                self.pos += 1;
                if self.field.r() == 1 {
                    return Err(Error::CoefficientNotInField(
                        "generator 'b' used in a prime field".into(),
                    ));
                }
                let e = self.optional_exponent()?;
                if e < 0 {
                    return err(pos, "negative power of b");
                }
                Ok(self.constant(self.field.generator().pow(e as u64)))
            }
            Some(b'T') | Some(b'U') => {
                let is_t = self.src[self.pos] == b'T';
                self.pos += 1;
                if !self.allow_series {
                    return Err(Error::CoefficientNotInField(
                        "series variable in an element literal".into(),
                    ));
                }
                if !is_t && self.ram == 1 {
                    return err(pos, "'U' requires a ramified tower");
                }
                let e = self.optional_exponent()?;
                let exp = if is_t { e * self.ram } else { e };
                let mut out = LaurentPoly::new();
                out.insert(exp, self.field.one());
                Ok(out)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr(false)?.terms;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) => err(pos, format!("unexpected '{}'", c as char)),
            None => err(pos, "unexpected end of input"),
        }
    }

    fn term(&mut self) -> Result<LaurentPoly> {
        let mut acc = self.factor()?;
        loop {
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else if !self.starts_factor() {
                break;
            }
            let rhs = self.factor()?;
            acc = poly_mul(&acc, &rhs);
        }
        Ok(acc)
    }

    fn big_o(&mut self) -> Result<i64> {
        // 'O' already consumed
        self.expect(b'(')?;
        let pos = self.pos;
        let is_t = match self.peek() {
            Some(b'T') => true,
            Some(b'U') if self.ram > 1 => false,
            _ => return err(pos, "expected T inside O(..)"),
        };
        self.pos += 1;
        let e = self.optional_exponent()?;
        self.expect(b')')?;
        Ok(if is_t { e * self.ram } else { e })
    }

    fn expr(&mut self, top: bool) -> Result<Parsed> {
        let mut terms = LaurentPoly::new();
        let mut big_o = None;
        let mut first = true;
        loop {
            let mut negate = false;
            match self.peek() {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    self.pos += 1;
                    negate = true;
                }
                _ if first => {}
                _ => break,
            }
            first = false;
            if top && self.peek() == Some(b'O') {
                let pos = self.pos;
                self.pos += 1;
                if negate {
                    return err(pos, "O(..) term cannot be negated");
                }
                big_o = Some(self.big_o()?);
                continue;
            }
            let t = self.term()?;
            for (e, c) in t {
                let c = if negate { c.neg() } else { c };
                poly_add(&mut terms, e, &c);
            }
        }
        Ok(Parsed { terms, big_o })
    }
}

pub(crate) fn parse_laurent(text: &str, field: &Field, ram: i64) -> Result<Parsed> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, field, ram, allow_series: true };
    let out = p.expr(true)?;
    if p.peek().is_some() {
        return err(p.pos, "trailing input");
    }
    Ok(out)
}

pub(crate) fn parse_element(text: &str, field: &Field) -> Result<FqElement> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, field, ram: 1, allow_series: false };
    let out = p.expr(false)?;
    if p.peek().is_some() {
        return err(p.pos, "trailing input");
    }
    Ok(out.terms.get(&0).cloned().unwrap_or_else(|| field.zero()))
}
