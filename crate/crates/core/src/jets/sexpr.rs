//! Prefix s-expression text form of [`Expression`].
//!
//! ```text
//! expr := (var I)                 I ≥ 1, one-based coordinate index
//!       | (const RE IM)           complex constant
//!       | NUMBER                  shorthand for (const NUMBER 0)
//!       | (add e e ...) | (mul e e ...)          left-folded when more than two
//!       | (sub e e) | (div e e) | (neg e)
//!       | (pow e N)               integer power, N may be negative
//!       | (powf e S)              real power, argument must be ≥ 0
//!       | (exp e) | (sin e) | (cos e) | (recip e)
//!       | (rexp e)                exp(−1/u) for u > 0, 0 for u ≤ 0
//!       | (smoothstep K e)        C^K ramp, 0 for u ≤ 0, 1 for u ≥ 1
//!       | (integral J RE IM ORDER PANELS TOL DEPTH e)
//!                                 S̃_{J,λ} e with λ = RE + i·IM, J one-based
//!       | (compose e a1 ... ak)   e(a1, ..., ak)
//! ```
//!
//! Printing always emits the canonical binary forms, and floats use Rust's
//! shortest round-trip representation, so `parse(print(e)) == e`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use super::expr::{Expression, Node};
use crate::inverse::QuadratureConfig;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Var(i) => write!(f, "(var {})", i + 1),
            Node::Const(c) => write!(f, "(const {} {})", c.re, c.im),
            Node::Add(a, b) => write!(f, "(add {a} {b})"),
            Node::Sub(a, b) => write!(f, "(sub {a} {b})"),
            Node::Mul(a, b) => write!(f, "(mul {a} {b})"),
            Node::Div(a, b) => write!(f, "(div {a} {b})"),
            Node::Neg(a) => write!(f, "(neg {a})"),
            Node::Pow(a, n) => write!(f, "(pow {a} {n})"),
            Node::Powf(a, s) => write!(f, "(powf {a} {s})"),
            Node::Exp(a) => write!(f, "(exp {a})"),
            Node::Sin(a) => write!(f, "(sin {a})"),
            Node::Cos(a) => write!(f, "(cos {a})"),
            Node::Recip(a) => write!(f, "(recip {a})"),
            Node::Rexp(a) => write!(f, "(rexp {a})"),
            Node::Smoothstep(a, k) => write!(f, "(smoothstep {k} {a})"),
            Node::Integral(node) => {
                let q = &node.quadrature;
                write!(
                    f,
                    "(integral {} {} {} {} {} {} {} {})",
                    node.axis + 1,
                    node.lambda.re,
                    node.lambda.im,
                    q.order,
                    q.initial_panels,
                    q.tol,
                    q.max_depth,
                    node.integrand
                )
            }
            Node::Compose(outer, args) => {
                write!(f, "(compose {outer}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
}

fn tokenize(src: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push((i, Token::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Token::Close));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b'(' | b')') && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                out.push((start, Token::Atom(&src[start..i])));
            }
        }
    }
    out
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        let position = self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.end);
        ParseError {
            position,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Token<'a>, ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .map(|t| t.1.clone())
            .ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn atom(&mut self, what: &str) -> Result<&'a str, ParseError> {
        match self.next()? {
            Token::Atom(a) => Ok(a),
            _ => {
                self.pos -= 1;
                Err(self.error(format!("expected {what}")))
            }
        }
    }

    fn number<T: FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let start = self.pos;
        let a = self.atom(what)?;
        a.parse().map_err(|_| {
            self.pos = start;
            self.error(format!("expected {what}, found `{a}`"))
        })
    }

    fn close(&mut self) -> Result<(), ParseError> {
        match self.next()? {
            Token::Close => Ok(()),
            _ => {
                self.pos -= 1;
                Err(self.error("expected `)`"))
            }
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        match self.next()? {
            Token::Atom(a) => {
                let value: f64 = a.parse().map_err(|_| {
                    self.pos -= 1;
                    self.error(format!("unexpected atom `{a}`"))
                })?;
                Ok(Expression::real(value))
            }
            Token::Close => {
                self.pos -= 1;
                Err(self.error("unexpected `)`"))
            }
            Token::Open => {
                let head_pos = self.pos;
                let head = self.atom("operator name")?;
                let e = self.form(head, head_pos)?;
                self.close()?;
                Ok(e)
            }
        }
    }

    fn form(&mut self, head: &str, head_pos: usize) -> Result<Expression, ParseError> {
        let node = match head {
            "var" => {
                let i: usize = self.number("variable index")?;
                if i == 0 {
                    self.pos -= 1;
                    return Err(self.error("variable indices are one-based"));
                }
                Node::Var(i - 1)
            }
            "const" => {
                let re = self.number("real part")?;
                let im = self.number("imaginary part")?;
                Node::Const(Complex64::new(re, im))
            }
            "add" | "mul" => {
                let mut acc = self.expr()?;
                let mut count = 1;
                while self.peek() != Some(&Token::Close) {
                    let rhs = self.expr()?;
                    acc = if head == "add" { acc + rhs } else { acc * rhs };
                    count += 1;
                }
                if count < 2 {
                    return Err(self.error(format!("`{head}` needs at least two operands")));
                }
                return Ok(acc);
            }
            "sub" => Node::Sub(self.expr()?, self.expr()?),
            "div" => Node::Div(self.expr()?, self.expr()?),
            "neg" => Node::Neg(self.expr()?),
            "pow" => {
                let a = self.expr()?;
                Node::Pow(a, self.number("integer exponent")?)
            }
            "powf" => {
                let a = self.expr()?;
                Node::Powf(a, self.number("real exponent")?)
            }
            "exp" => Node::Exp(self.expr()?),
            "sin" => Node::Sin(self.expr()?),
            "cos" => Node::Cos(self.expr()?),
            "recip" => Node::Recip(self.expr()?),
            "rexp" => Node::Rexp(self.expr()?),
            "smoothstep" => {
                let k = self.number("smoothness order")?;
                Node::Smoothstep(self.expr()?, k)
            }
            "integral" => {
                let axis: usize = self.number("axis")?;
                if axis == 0 {
                    self.pos -= 1;
                    return Err(self.error("axes are one-based"));
                }
                let re = self.number("real part of lambda")?;
                let im = self.number("imaginary part of lambda")?;
                let quadrature = QuadratureConfig {
                    order: self.number("quadrature order")?,
                    initial_panels: self.number("initial panel count")?,
                    tol: self.number("quadrature tolerance")?,
                    max_depth: self.number("maximum depth")?,
                };
                let integrand = self.expr()?;
                return Ok(Expression::integral(
                    integrand,
                    axis - 1,
                    Complex64::new(re, im),
                    quadrature,
                ));
            }
            "compose" => {
                let outer = self.expr()?;
                let mut args = Vec::new();
                while self.peek() != Some(&Token::Close) {
                    args.push(self.expr()?);
                }
                if args.is_empty() {
                    return Err(self.error("`compose` needs at least one argument"));
                }
                Node::Compose(outer, args)
            }
            other => {
                self.pos = head_pos;
                return Err(self.error(format!("unknown operator `{other}`")));
            }
        };
        Ok(Expression::from_node(node))
    }
}

impl Expression {
    pub fn parse(src: &str) -> Result<Expression, ParseError> {
        let mut parser = Parser {
            tokens: tokenize(src),
            pos: 0,
            end: src.len(),
        };
        let e = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("trailing input after expression"));
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let e = Expression::parse("(mul (exp (var 1)) (sin (var 2)))").unwrap();
        let expect = Expression::var(0).exp() * Expression::var(1).sin();
        assert_eq!(e, expect);
        assert_eq!(e.to_string(), "(mul (exp (var 1)) (sin (var 2)))");
    }

    #[test]
    fn round_trip_with_all_nodes() {
        let src = "(compose (integral 2 0.5 -1 8 4 0.0000000001 20 (add (powf (var 1) 1.4142135623730951) (smoothstep 3 (rexp (var 2))))) (div (var 2) (const 2 0)) (pow (neg (recip (var 1))) -3))";
        let e = Expression::parse(src).unwrap();
        let printed = e.to_string();
        assert_eq!(Expression::parse(&printed).unwrap(), e);
    }

    #[test]
    fn bare_numbers_and_nary_sum() {
        let e = Expression::parse("(add 1 (var 1) 2.5)").unwrap();
        assert_eq!(e.eval(&[1.0]).unwrap(), Complex64::new(4.5, 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        let err = Expression::parse("(add (var 1) (foo 2))").unwrap_err();
        assert_eq!(err.position, 14);
        assert!(err.message.contains("foo"));
        let err = Expression::parse("(var 0)").unwrap_err();
        assert!(err.message.contains("one-based"));
        assert!(Expression::parse("(exp (var 1)").is_err());
        assert!(Expression::parse("(exp (var 1)))").is_err());
    }
}
