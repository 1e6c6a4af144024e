//! Infix expression text reader.
//!
//! Grammar: `+ - * /`, integer powers with `^`, `ln(..)`, `sqrt(..)`,
//! real literals and imaginary literals written with a trailing `i`
//! (`2.5i`, or `i` alone). Identifiers start with a letter or `_`.

use num_complex::Complex64;

use super::expr::Expr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Complex64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

fn location(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for c in src.chars().take(offset) {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn error_at(src: &str, offset: usize, message: impl Into<String>) -> Error {
    let (line, column) = location(src, offset);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            chars: src.chars().collect(),
            pos: 0,
            src,
        };
        let mut out = Vec::new();
        loop {
            let tok = lx.next()?;
            let done = tok.0 == Tok::End;
            out.push(tok);
            if done {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.chars.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = self.chars.get(self.pos) {
                if d.is_alphanumeric() || d == '_' {
                    s.push(d);
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if s == "i" {
                return Ok((Tok::Num(Complex64::new(0.0, 1.0)), start));
            }
            return Ok((Tok::Ident(s), start));
        }
        self.pos += 1;
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(error_at(self.src, start, format!("unexpected character `{c}`"))),
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let mut s = String::new();
        while let Some(&d) = self.chars.get(self.pos) {
            if d.is_ascii_digit() || d == '.' {
                s.push(d);
                self.pos += 1;
            } else {
                break;
            }
        }
        if matches!(self.chars.get(self.pos), Some('e') | Some('E')) {
            let save = self.pos;
            let mut exp = String::from("e");
            self.pos += 1;
            if let Some(&sign) = self.chars.get(self.pos) {
                if sign == '+' || sign == '-' {
                    exp.push(sign);
                    self.pos += 1;
                }
            }
            let digits_start = self.pos;
            while let Some(&d) = self.chars.get(self.pos) {
                if d.is_ascii_digit() {
                    exp.push(d);
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.pos == digits_start {
                self.pos = save;
            } else {
                s.push_str(&exp);
            }
        }
        let value: f64 = s
            .parse()
            .map_err(|_| error_at(self.src, start, format!("malformed number `{s}`")))?;
        let imaginary = self.chars.get(self.pos) == Some(&'i')
            && !self
                .chars
                .get(self.pos + 1)
                .is_some_and(|d| d.is_alphanumeric() || *d == '_');
        if imaginary {
            self.pos += 1;
            return Ok((Tok::Num(Complex64::new(0.0, value)), start));
        }
        Ok((Tok::Num(Complex64::new(value, 0.0)), start))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(error_at(self.src, self.offset(), message))
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.fail("expected `)`")
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = lhs + self.product()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = lhs - self.product()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let n = self.integer_exponent()?;
        Ok(base.powi(n))
    }

    fn integer_exponent(&mut self) -> Result<i32> {
        let parens = *self.peek() == Tok::LParen;
        if parens {
            self.bump();
        }
        let mut sign = 1;
        while let Tok::Op(c @ ('-' | '+')) = self.peek() {
            if *c == '-' {
                sign = -sign;
            }
            self.bump();
        }
        let value = match self.peek() {
            Tok::Num(c) if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() < 1e6 => c.re as i32,
            _ => return self.fail("exponent must be an integer literal"),
        };
        self.bump();
        if parens {
            self.expect_rparen()?;
        }
        Ok(sign * value)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Tok::Num(c) => Ok(Expr::constant(c)),
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Ok(Expr::var(&name));
                }
                let at = self.offset();
                self.bump();
                let arg = self.sum()?;
                self.expect_rparen()?;
                match name.as_str() {
                    "ln" | "log" => Ok(arg.ln()),
                    "sqrt" => Ok(arg.sqrt()),
                    _ => Err(error_at(self.src, at, format!("unknown function `{name}`"))),
                }
            }
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::End => {
                self.pos = self.toks.len() - 1;
                self.fail("unexpected end of input")
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.fail(format!("unexpected token {other:?}"))
            }
        }
    }
}

/// Parses expression text into an [`Expr`].
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, pos: 0, src };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return p.fail("trailing input");
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        parse_expr(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn precedence_and_powers() {
        let e = parse_expr("1 + 2*x^2 - x/4").unwrap();
        assert_eq!(e.eval(&[("x", c(2.0, 0.0))]).unwrap(), c(8.5, 0.0));
        let e = parse_expr("-x^2").unwrap();
        assert_eq!(e.eval(&[("x", c(3.0, 0.0))]).unwrap(), c(-9.0, 0.0));
        let e = parse_expr("x^(-2) + x^-1").unwrap();
        assert_eq!(e.eval(&[("x", c(2.0, 0.0))]).unwrap(), c(0.75, 0.0));
    }

    #[test]
    fn complex_literals() {
        let e = parse_expr("1.5+2i").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), c(1.5, 2.0));
        let e = parse_expr("i*i").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), c(-1.0, 0.0));
        let e = parse_expr("3e-1 - 2.0e1i").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), c(0.3, -20.0));
    }

    #[test]
    fn identifiers_and_functions() {
        let e = parse_expr("ln(x_1) + sqrt(idx)").unwrap();
        let v = e.eval(&[("x_1", c(1.0, 0.0)), ("idx", c(9.0, 0.0))]).unwrap();
        assert_eq!(v, c(3.0, 0.0));
    }

    #[test]
    fn round_trip_display() {
        for s in ["(x + 2)^3 / (y - 1.5i)", "-ln(x*y) + (2-3i)*z", "sqrt(w)^(-3)"] {
            let e = parse_expr(s).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            let at = [
                ("x", c(0.7, 0.1)),
                ("y", c(1.3, -0.4)),
                ("z", c(0.2, 0.0)),
                ("w", c(2.0, 1.0)),
            ];
            let (a, b) = (e.eval(&at).unwrap(), again.eval(&at).unwrap());
            assert!((a - b).norm() < 1e-14, "{s}");
        }
    }

    #[test]
    fn errors_carry_location() {
        match parse_expr("x +\n  * y") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("x^1.5"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("foo(x)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("(x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("x $ y"), Err(Error::Parse { .. })));
    }
}
