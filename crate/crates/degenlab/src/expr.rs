//! Text expression parser shared by the catalog format and the CLI.
//!
//! Grammar (ASCII):
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-' | '+') factor | atom ('^' int)?
//! atom   := rational | name | '(' expr ')'
//! ```
//! `i` is the imaginary unit; any other name is an interned variable.
//! Exponents may be negative, in which case the result is a rational
//! function.

use thiserror::Error;

use crate::poly::{var, Poly};
use crate::ratfun::RatFun;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at column {col}: {msg}")]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(String),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
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

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        self.skip_ws();
        let at = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, at));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                return Ok((
                    Tok::Int(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()),
                    at,
                ));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                return Ok((
                    Tok::Name(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()),
                    at,
                ));
            }
            other => {
                return Err(ExprError {
                    col: at + 1,
                    msg: format!("unexpected character '{}'", other as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, at))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    cur: Tok,
    cur_at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut lex = Lexer::new(src);
        let (cur, cur_at) = lex.next()?;
        Ok(Parser { lex, cur, cur_at })
    }

    fn bump(&mut self) -> Result<(), ExprError> {
        let (t, a) = self.lex.next()?;
        self.cur = t;
        self.cur_at = a;
        Ok(())
    }

    fn err(&self, msg: impl Into<String>) -> ExprError {
        ExprError {
            col: self.cur_at + 1,
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<RatFun, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.cur {
                Tok::Plus => {
                    self.bump()?;
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump()?;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFun, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.cur {
                Tok::Star => {
                    self.bump()?;
                    acc = &acc * &self.factor()?;
                }
                Tok::Slash => {
                    self.bump()?;
                    let rhs = self.factor()?;
                    if rhs.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    acc = &acc / &rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RatFun, ExprError> {
        match self.cur {
            Tok::Minus => {
                self.bump()?;
                Ok(-&self.factor()?)
            }
            Tok::Plus => {
                self.bump()?;
                self.factor()
            }
            _ => {
                let base = self.atom()?;
                if self.cur == Tok::Caret {
                    self.bump()?;
                    let neg = if self.cur == Tok::Minus {
                        self.bump()?;
                        true
                    } else {
                        false
                    };
                    let n = match &self.cur {
                        Tok::Int(s) => s
                            .parse::<i32>()
                            .map_err(|_| self.err("exponent out of range"))?,
                        _ => return Err(self.err("expected integer exponent")),
                    };
                    self.bump()?;
                    let e = if neg { -n } else { n };
                    if e < 0 && base.is_zero() {
                        return Err(self.err("zero to a negative power"));
                    }
                    Ok(base.pow(e))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn atom(&mut self) -> Result<RatFun, ExprError> {
        match self.cur.clone() {
            Tok::Int(s) => {
                self.bump()?;
                let n: i64 = s.parse().map_err(|_| self.err("integer out of range"))?;
                Ok(RatFun::constant(Scalar::from_int(n)))
            }
            Tok::Name(name) => {
                self.bump()?;
                if name == "i" {
                    Ok(RatFun::constant(Scalar::i()))
                } else {
                    Ok(RatFun::variable(var(&name)))
                }
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.cur != Tok::RParen {
                    return Err(self.err("expected ')'"));
                }
                self.bump()?;
                Ok(inner)
            }
            _ => Err(self.err("expected a number, name, or '('")),
        }
    }
}

/// Parses an expression into a rational function.
pub fn parse_ratfun(src: &str) -> Result<RatFun, ExprError> {
    let mut p = Parser::new(src)?;
    let r = p.expr()?;
    if p.cur != Tok::End {
        return Err(p.err("trailing input"));
    }
    Ok(r)
}

/// Parses an expression that must be a polynomial (no surviving denominator).
pub fn parse_poly(src: &str) -> Result<Poly, ExprError> {
    let r = parse_ratfun(src)?;
    r.as_poly().ok_or(ExprError {
        col: 1,
        msg: format!("expected a polynomial, got rational function {r}"),
    })
}

/// Parses an expression that must be a constant scalar.
pub fn parse_scalar(src: &str) -> Result<Scalar, ExprError> {
    let r = parse_ratfun(src)?;
    match (r.num().as_constant(), r.den().as_constant()) {
        (Some(n), Some(d)) => Ok(&n / &d),
        _ => Err(ExprError {
            col: 1,
            msg: format!("expected a scalar, got {r}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_polynomials() {
        let p = parse_poly("alpha*t + 3").unwrap();
        assert_eq!(p.to_string(), "alpha*t + 3");
        let q = parse_poly("(t-1)*t^3").unwrap();
        assert_eq!(q.degree(), 4);
    }

    #[test]
    fn parses_rational_functions() {
        let r = parse_ratfun("1/t").unwrap();
        assert!(r.as_poly().is_none());
        let s = parse_ratfun("t^-1").unwrap();
        assert_eq!(r, s);
        let u = parse_ratfun("(1-s^2)/(2*t*s)").unwrap();
        assert!(!u.is_zero());
    }

    #[test]
    fn parses_scalars() {
        assert_eq!(parse_scalar("-1/2").unwrap(), Scalar::from_ratio(-1, 2));
        assert_eq!(parse_scalar("1/2-3/4*i").unwrap().to_string(), "1/2-3/4*i");
        assert_eq!(parse_scalar("i^2").unwrap(), Scalar::from_int(-1));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly("1/t").is_err());
        assert!(parse_ratfun("alpha +").is_err());
        assert!(parse_ratfun("$x").is_err());
    }
}
