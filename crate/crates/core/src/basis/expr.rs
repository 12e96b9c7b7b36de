use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

/// Expression tree over rational constants and the variables `x1..xk`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(v: impl Into<Rational>) -> Expr {
        Expr::Const(v.into())
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn pow(self, exp: u32) -> Expr {
        Expr::Pow(Box::new(self), exp)
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        Expr::Apply(func, Box::new(arg))
    }

    /// True iff no `sin`, `cos` or `exp` node appears.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Neg(e) | Expr::Pow(e, _) => e.is_polynomial(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_polynomial() && b.is_polynomial(),
            Expr::Apply(..) => false,
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Apply(_, e) => e.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Exact evaluation; fails on transcendental nodes.
    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational> {
        Ok(match self {
            Expr::Const(c) => c.clone(),
            Expr::Var(i) => point.get(*i).cloned().ok_or_else(|| {
                Error::Dimension(format!("variable x{} on a {}-dimensional point", i + 1, point.len()))
            })?,
            Expr::Neg(e) => -e.eval_exact(point)?,
            Expr::Add(a, b) => a.eval_exact(point)? + b.eval_exact(point)?,
            Expr::Sub(a, b) => a.eval_exact(point)? - b.eval_exact(point)?,
            Expr::Mul(a, b) => a.eval_exact(point)? * b.eval_exact(point)?,
            Expr::Pow(e, k) => e.eval_exact(point)?.pow(*k),
            Expr::Apply(f, _) => return Err(Error::InvalidInput(format!("{} has no exact rational value", f.name()))),
        })
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Const(c) => c.to_f64(),
            Expr::Var(i) => *point.get(*i).ok_or_else(|| {
                Error::Dimension(format!("variable x{} on a {}-dimensional point", i + 1, point.len()))
            })?,
            Expr::Neg(e) => -e.eval_f64(point)?,
            Expr::Add(a, b) => a.eval_f64(point)? + b.eval_f64(point)?,
            Expr::Sub(a, b) => a.eval_f64(point)? - b.eval_f64(point)?,
            Expr::Mul(a, b) => a.eval_f64(point)? * b.eval_f64(point)?,
            Expr::Pow(e, k) => e.eval_f64(point)?.powi(*k as i32),
            Expr::Apply(f, e) => {
                let x = e.eval_f64(point)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidInput(format!("evaluation of `{self}` overflowed")))
        }
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

macro_rules! binary_node {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;

            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binary_node!(Add, add, Add);
binary_node!(Sub, sub, Sub);
binary_node!(Mul, mul, Mul);

/// Fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_integer() && c.signum() != crate::exactnum::SignClass::Negative {
                    write!(f, "{c}")
                } else if c.signum() == crate::exactnum::SignClass::Negative {
                    write!(f, "(-{})", c.abs())
                } else {
                    write!(f, "({c})")
                }
            }
            Expr::Var(i) => match i {
                0 => f.write_str("x"),
                1 => f.write_str("y"),
                2 => f.write_str("z"),
                _ => write!(f, "x{}", i + 1),
            },
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Pow(e, k) => write!(f, "({e}^{k})"),
            Expr::Apply(func, e) => {
                // Strip one redundant layer so `sin(x)` does not print as `sin((x))`.
                write!(f, "{}({})", func.name(), Bare(e))
            }
        }
    }
}

struct Bare<'a>(&'a Expr);

impl fmt::Display for Bare<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.to_string();
        match self.0 {
            Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) | Expr::Pow(..) => f.write_str(&s[1..s.len() - 1]),
            _ => f.write_str(&s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(Rational, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn describe(tok: Option<&(usize, Token)>) -> String {
    match tok {
        None => "end of input".into(),
        Some((_, Token::Number(_, s))) => format!("`{s}`"),
        Some((_, Token::Ident(s))) => format!("`{s}`"),
        Some((_, t)) => format!(
            "`{}`",
            match t {
                Token::Plus => "+",
                Token::Minus => "-",
                Token::Star => "*",
                Token::Slash => "/",
                Token::Caret => "^",
                Token::LParen => "(",
                _ => ")",
            }
        ),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((start, tok));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let lit = &text[start..i];
            let value = lit.parse::<Rational>().map_err(|_| Error::Parse {
                position: start,
                message: format!("malformed number `{lit}`"),
            })?;
            out.push((start, Token::Number(value, lit.to_string())));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(text[start..i].to_string())));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(Error::Parse {
                position: start,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

/// Recursive-descent parser. Precedence, tightest first: `^`, unary `-`,
/// `*` `/`, `+` `-`. Division is only accepted by a rational constant.
struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek().map(|(_, t)| t) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Token::Plus) {
                lhs = lhs + self.term()?;
            } else if self.eat(&Token::Minus) {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Token::Star) {
                lhs = lhs * self.unary()?;
            } else if self.eat(&Token::Slash) {
                let at = self.offset();
                let divisor = match self.unary()? {
                    Expr::Const(c) => c,
                    _ => {
                        return Err(Error::Parse {
                            position: at,
                            message: "divisor must be a rational constant".into(),
                        })
                    }
                };
                let inverse = divisor.recip().ok_or(Error::Parse {
                    position: at,
                    message: "division by zero".into(),
                })?;
                lhs = match lhs {
                    Expr::Const(c) => Expr::Const(c * inverse),
                    other => other * Expr::Const(inverse),
                };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(&Token::Minus) {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                other => -other,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        while self.eat(&Token::Caret) {
            match self.peek().cloned() {
                Some((_, Token::Number(v, lit))) => {
                    let exp = if v.is_integer() && !lit.contains('.') {
                        u32::try_from(v.numer()).ok()
                    } else {
                        None
                    };
                    match exp {
                        Some(k) => {
                            self.pos += 1;
                            base = base.pow(k);
                        }
                        None => return self.error(format!("exponent `{lit}` is not a non-negative integer")),
                    }
                }
                Some((_, Token::Minus)) => return self.error("negative exponent"),
                other => {
                    return self.error(format!(
                        "expected a non-negative integer exponent, found {}",
                        describe(other.as_ref())
                    ))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some((at, tok)) = self.peek().cloned() else {
            return self.error("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Token::Number(v, _) => Ok(Expr::Const(v)),
            Token::LParen => {
                let inner = self.expr()?;
                if !self.eat(&Token::RParen) {
                    return self.error(format!("expected `)`, found {}", describe(self.peek())));
                }
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if !self.eat(&Token::LParen) {
                        return self.error(format!("expected `(` after `{name}`"));
                    }
                    let arg = self.expr()?;
                    if !self.eat(&Token::RParen) {
                        return self.error(format!("expected `)`, found {}", describe(self.peek())));
                    }
                    return Ok(Expr::apply(func, arg));
                }
                let index = variable_index(&name).ok_or_else(|| Error::Parse {
                    position: at,
                    message: format!("unknown identifier `{name}`"),
                })?;
                if index >= self.dim {
                    return Err(Error::Parse {
                        position: at,
                        message: format!("variable `{name}` is out of range for dimension {}", self.dim),
                    });
                }
                Ok(Expr::Var(index))
            }
            other => {
                self.pos -= 1;
                self.error(format!("unexpected {}", describe(Some(&(at, other)))))
            }
        }
    }
}

/// `x`, `y`, `z` name the first three coordinates; `x1`..`x9` any of nine.
fn variable_index(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => {
            let digits = name.strip_prefix('x')?;
            match digits.parse::<usize>() {
                Ok(i @ 1..=9) if digits.len() == 1 => Some(i - 1),
                _ => None,
            }
        }
    }
}

/// Parses an expression over `dim` variables.
pub fn parse_expression(text: &str, dim: usize) -> Result<Expr> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        dim,
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return parser.error(format!("unexpected {}", describe(parser.peek())));
    }
    Ok(expr)
}
