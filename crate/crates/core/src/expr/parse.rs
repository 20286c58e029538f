//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' unary)?
//! primary  := number | variable | func '(' expr ')' | '(' expr ')'
//! variable := 'x' digits | 't' | 'w' digits ('[' index (',' index)* ']')?
//! ```

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{simplify, Expr, FuncKind, Index, MultiIndex, Rational, VarRef};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().expect("digits");
                lx.toks.push((start, Tok::Num(n)));
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                lx.toks.push((start, Tok::Ident(src[start..i].to_string())));
            } else if "+-*/^()[],".contains(c) {
                lx.toks.push((i, Tok::Sym(c)));
                i += 1;
            } else {
                return Err(lx.error(i, "unexpected character"));
            }
        }
        lx.toks.push((src.len(), Tok::End));
        Ok(lx.toks)
    }

    fn error(&self, pos: usize, msg: &str) -> Error {
        let token: String = self.src[pos..].chars().take(8).collect();
        Error::Parse { pos, token, msg: msg.to_string() }
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> Error {
        let pos = self.pos();
        let token = match self.peek() {
            Tok::End => "<end>".to_string(),
            _ => self.src[pos..].chars().take_while(|c| !c.is_whitespace()).take(12).collect(),
        };
        Error::Parse { pos, token, msg: msg.to_string() }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    terms.push(negate(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms.into()) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    let at = self.pos();
                    let d = self.unary()?;
                    if simplify(&d).is_zero() {
                        return Err(Error::Parse {
                            pos: at,
                            token: self.src[at..self.pos()].trim().to_string(),
                            msg: "division by zero".into(),
                        });
                    }
                    factors.push(Expr::Power(Arc::new(d), -Rational::one()));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors.into()) })
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.pos();
        let exponent = simplify(&self.unary()?);
        let span = self.src[at..self.pos()].trim().to_string();
        let Expr::Const(q) = exponent else {
            return Err(Error::Parse { pos: at, token: span, msg: "exponent must be a rational constant".into() });
        };
        if q < Rational::zero() && simplify(&base).is_zero() {
            return Err(Error::Parse { pos: at, token: span, msg: "division by zero".into() });
        }
        Ok(Expr::Power(Arc::new(base), q))
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Const(Rational::from_integer(n)))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let kind = match name.as_str() {
                    "exp" => Some(FuncKind::Exp),
                    "ln" => Some(FuncKind::Ln),
                    "sin" => Some(FuncKind::Sin),
                    "cos" => Some(FuncKind::Cos),
                    _ => None,
                };
                if let Some(kind) = kind {
                    self.bump();
                    self.expect('(')?;
                    let a = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Func(kind, Arc::new(a)));
                }
                self.variable(&name).map(Expr::Var)
            }
            _ => Err(self.error("expected a number, variable, function or `(`")),
        }
    }

    fn variable(&mut self, name: &str) -> Result<VarRef> {
        let number = |s: &str| s.parse::<usize>().ok().filter(|&k| k >= 1);
        let v = if name == "t" {
            VarRef::t()
        } else if let Some(i) = name.strip_prefix('x').and_then(number).filter(|&i| i < u8::MAX as usize) {
            VarRef::x(i)
        } else if let Some(j) = name.strip_prefix('w').and_then(number).filter(|&j| j <= u16::MAX as usize) {
            self.bump();
            let mut idx = Vec::new();
            if *self.peek() == Tok::Sym('[') {
                self.bump();
                loop {
                    idx.push(self.index()?);
                    match self.peek() {
                        Tok::Sym(',') => self.bump(),
                        Tok::Sym(']') => {
                            self.bump();
                            break;
                        }
                        _ => return Err(self.error("expected `,` or `]`")),
                    };
                }
            }
            return Ok(VarRef::jet(j, MultiIndex::new(idx)));
        } else {
            return Err(self.error("unknown identifier"));
        };
        self.bump();
        Ok(v)
    }

    fn index(&mut self) -> Result<Index> {
        match self.peek().clone() {
            Tok::Num(n) => {
                let i = usize::try_from(n).ok().filter(|i| (1..u8::MAX as usize).contains(i));
                let Some(i) = i else { return Err(self.error("index out of range")) };
                self.bump();
                Ok(Index::x(i))
            }
            Tok::Ident(s) if s == "t" => {
                self.bump();
                Ok(Index::T)
            }
            _ => Err(self.error("expected an index")),
        }
    }
}

fn negate(e: Expr) -> Expr {
    Expr::Product(vec![Expr::int(-1), e].into())
}

/// Parses into a raw, uncanonicalized tree.
pub fn parse_raw(src: &str) -> Result<Expr> {
    let toks = Lexer::run(src)?;
    let mut p = Parser { src, toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses and canonicalizes.
pub fn parse(src: &str) -> Result<Expr> {
    parse_raw(src).map(|e| simplify(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x1^2").unwrap(), parse("-(x1^2)").unwrap());
        assert_eq!(parse("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse("1 - 2 - 3").unwrap(), Expr::int(-4));
        assert_eq!(parse("12/4/3").unwrap(), Expr::one());
        assert_eq!(parse("x1^-1").unwrap(), parse("1/x1").unwrap());
    }

    #[test]
    fn jet_indices_are_sorted() {
        assert_eq!(parse("w1[2,1]").unwrap(), Expr::w(1, &[1, 2]));
        assert_eq!(parse("w2[t,1]").unwrap(), Expr::Var(VarRef::variation(2, &[1])));
    }

    #[test]
    fn rejects_bad_input() {
        for src in ["1/0", "x1/(w1 - w1)", "0^-1", "w1^x1", "w1[0]", "y1", "3.5", "(w1", "w1 w2", "w1[1"] {
            assert!(parse(src).is_err(), "{src} should not parse");
        }
        match parse("w1 + ?") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
    }
}
