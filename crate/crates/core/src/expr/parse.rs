//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr  := term (("+"|"-") term)*
//! term  := unary (("*"|"/") unary)*
//! unary := "-"? power
//! power := atom ("^" unary)?
//! atom  := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! ```
//!
//! NUMBER is a decimal literal (rationals are spelled `p/q` via division).
//! IDENT is a variable (`t`, `x`, `u`, jet variables), a known function
//! (`exp`, `ln`, `sin`, `cos`, `atan`, `abs`, `sqrt`) or a symbolic constant.
//! `sqrt(e)` desugars to `e^(1/2)`.

use super::{Expr, Func, Var};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function name `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos >= p.src.len() {
        return Err(ParseError::Empty);
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: msg.to_string(),
        }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    factors.push(self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.unary()?;
                    factors.push(Expr::pow(d, Expr::int(-1)));
                }
                _ => break,
            }
        }
        Ok(Expr::mul(factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(self.power()?.neg())
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.unary()?;
            Ok(Expr::pow(base, e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("expected a number, identifier or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = &self.src[start..self.pos];
        let mut numer = BigInt::parse_bytes(int_part, 10)
            .ok_or_else(|| self.err("invalid number"))?;
        let mut denom = BigInt::one();
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let fstart = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == fstart {
                return Err(self.err("expected digits after decimal point"));
            }
            for &d in &self.src[fstart..self.pos] {
                numer = numer * 10 + BigInt::from((d - b'0') as u32);
                denom *= BigInt::from(10);
            }
        }
        Ok(Expr::Const(BigRational::new(numer, denom)))
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| self.err("invalid identifier"))?
            .to_string();
        // a call?
        let save = self.pos;
        if self.eat(b'(') {
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)` after function argument"));
            }
            if name == "sqrt" {
                return Ok(Expr::pow(arg, Expr::rat(1, 2)));
            }
            return match Func::from_name(&name) {
                Some(f) => Ok(Expr::apply(f, arg)),
                None => Err(ParseError::UnknownFunction {
                    offset: start,
                    name,
                }),
            };
        }
        self.pos = save;
        if let Some(v) = Var::from_name(&name) {
            return Ok(Expr::var(v));
        }
        Ok(Expr::Sym(name))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{expand, Expr, Func};
    use super::*;

    #[test]
    fn grammar_examples() {
        let e = parse("x^2 + 2*x").unwrap();
        let want = Expr::pow(Expr::x(), Expr::int(2)) + Expr::int(2) * Expr::x();
        assert_eq!(e, want);

        let e = parse("exp(d*atan(x))").unwrap();
        let want = Expr::apply(
            Func::Exp,
            Expr::sym("d") * Expr::apply(Func::Atan, Expr::x()),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn symbolic_exponent_family() {
        let e = parse("x^(-(3*n+4)/(n+1))").unwrap();
        let n = Expr::sym("n");
        let want = Expr::pow(
            Expr::x(),
            (Expr::int(3) * n.clone() + Expr::int(4)).neg() / (n + Expr::one()),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse("x + 1").unwrap(), parse("x+1").unwrap());
        assert_eq!(parse(" 2 * x ^ 2 ").unwrap(), parse("2*x^2").unwrap());
    }

    #[test]
    fn errors() {
        assert_eq!(parse(""), Err(ParseError::Empty));
        assert!(matches!(parse("x +"), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse("foo(x)"),
            Err(ParseError::UnknownFunction { .. })
        ));
        assert!(matches!(parse("(x"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn decimals_are_exact_rationals() {
        assert_eq!(parse("0.5").unwrap(), Expr::rat(1, 2));
        assert_eq!(parse("2.25").unwrap(), Expr::rat(9, 4));
    }

    #[test]
    fn sqrt_desugars() {
        assert_eq!(
            parse("sqrt(x)").unwrap(),
            Expr::pow(Expr::x(), Expr::rat(1, 2))
        );
    }

    #[test]
    fn jet_variables() {
        let e = parse("u_x*u_xx + u_t").unwrap();
        assert!(e.contains_var(super::super::Var::Ux));
        assert!(e.contains_var(super::super::Var::Uxx));
        assert!(e.contains_var(super::super::Var::Ut));
    }

    #[test]
    fn rational_literal_via_division() {
        assert_eq!(parse("1/2").unwrap(), Expr::rat(1, 2));
    }

    #[test]
    fn unary_minus_binds_below_power() {
        // -x^2 must be -(x^2)
        let e = parse("-x^2").unwrap();
        let want = Expr::pow(Expr::x(), Expr::int(2)).neg();
        assert_eq!(e, want);
    }

    #[test]
    fn display_roundtrip_smoke() {
        for s in [
            "x^2 + 2*x",
            "exp(d*atan(x))",
            "x^(-(3*n+4)/(n+1))",
            "1/2*x - 3",
            "-x^2 + abs(x)^(1/2)",
            "(x + 1)*(x - 1)",
            "u_x*u^n",
            "2^(1/2)*x",
        ] {
            let e = parse(s).unwrap();
            let printed = e.to_string();
            let back = parse(&printed).unwrap_or_else(|err| {
                panic!("reparse of `{printed}` failed: {err}");
            });
            assert_eq!(back, e, "round trip failed for {s} -> {printed}");
            // expansion must also round trip
            let xp = expand(&e);
            let printed = xp.to_string();
            assert_eq!(parse(&printed).unwrap(), xp);
        }
    }
}
