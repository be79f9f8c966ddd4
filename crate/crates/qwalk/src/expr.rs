//! Tiny arithmetic language for schedule fields in config files.
//!
//! Variables `x` and `t`; constants `pi`, `a`, `L`; functions sin, cos, tan,
//! arcsin, arccos, arctan, sqrt, exp, ln, abs; operators + - * / ^.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    T,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Sqrt,
    Exp,
    Ln,
    Abs,
}

/// Values substituted for the named constants `a` and `L`.
#[derive(Clone, Copy, Debug)]
pub struct Constants {
    pub a: f64,
    pub scale: f64,
}

impl Expr {
    pub fn parse(text: &str, consts: Constants) -> Result<Expr> {
        let mut p = Parser { src: text.as_bytes(), pos: 0, consts };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::T => t,
            Expr::Neg(e) => -e.eval(x, t),
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(x, t), r.eval(x, t));
                match op {
                    Op::Add => l + r,
                    Op::Sub => l - r,
                    Op::Mul => l * r,
                    Op::Div => l / r,
                    Op::Pow => l.powf(r),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(x, t);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Asin => v.asin(),
                    Func::Acos => v.acos(),
                    Func::Atan => v.atan(),
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }

    pub fn is_constant_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    consts: Constants,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Expr { col: self.pos + 1, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(ch) = self.peek() {
            let op = match ch {
                b'+' => Op::Add,
                b'-' => Op::Sub,
                _ => break,
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(ch) = self.peek() {
            let op = match ch {
                b'*' => Op::Mul,
                b'/' => Op::Div,
                _ => break,
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Num).map_err(|_| Error::Expr {
            col: start + 1,
            msg: format!("invalid number '{text}'"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "arcsin" | "asin" => Some(Func::Asin),
            "arccos" | "acos" => Some(Func::Acos),
            "arctan" | "atan" => Some(Func::Atan),
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "abs" => Some(Func::Abs),
            _ => None,
        };
        if let Some(f) = func {
            if self.peek() != Some(b'(') {
                return Err(self.err(&format!("expected '(' after {name}")));
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match name {
            "x" => Ok(Expr::X),
            "t" => Ok(Expr::T),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "a" => Ok(Expr::Num(self.consts.a)),
            "L" => Ok(Expr::Num(self.consts.scale)),
            _ => Err(Error::Expr { col: start + 1, msg: format!("unknown identifier '{name}'") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: Constants = Constants { a: 0.004, scale: 250.0 };

    fn ev(s: &str, x: f64, t: f64) -> f64 {
        Expr::parse(s, K).unwrap().eval(x, t)
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert!((ev("0.5*arccos(x + 5*a)", 0.1, 0.0) - 0.5 * (0.12f64).acos()).abs() < 1e-15);
        assert!((ev("-1000*x*t - 0.03*x/L", 0.2, 0.5) - (-100.0 - 0.03 * 0.2 / 250.0)).abs() < 1e-12);
        assert_eq!(ev("1.5e-3", 0.0, 0.0), 1.5e-3);
        assert!((ev("pi/8 + 2*x", 0.0, 0.0) - std::f64::consts::PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_columns() {
        match Expr::parse("1 + foo", K) {
            Err(Error::Expr { col, .. }) => assert_eq!(col, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expr::parse("cos x", K).is_err());
        assert!(Expr::parse("(1 + 2", K).is_err());
        assert!(Expr::parse("1 2", K).is_err());
    }
}
