//! Arithmetic expressions over chart coordinates.
//!
//! Grammar:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | factor
//! factor   := base ('^' unary)?
//! base     := number | coordinate | function '(' expr ')' | '(' expr ')'
//! function := sin | cos | tan | exp | log | sqrt | sinh | cosh
//! coordinate := x1 | x2 | x3 | x4
//! ```
//!
//! Exponentiation is right-associative and binds tighter than unary minus,
//! so `-x1^2` is `-(x1^2)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::geom_core::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index.
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

pub const MAX_ARITY: usize = 4;

impl Expr {
    pub fn parse(text: &str, arity: usize) -> Result<Expr> {
        if !(1..=MAX_ARITY).contains(&arity) {
            return Err(Error::Invalid(format!(
                "arity {arity} outside 1..={MAX_ARITY}"
            )));
        }
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            arity,
        };
        p.skip_ws();
        if p.pos == p.src.len() {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.unexpected());
        }
        Ok(e)
    }

    /// Largest zero-based coordinate index used, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Coord(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_coord(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => match (a.max_coord(), b.max_coord()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_coord().is_none()
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(match self {
            Expr::Num(c) => T::from_f64(*c),
            Expr::Coord(i) => match x.get(*i) {
                Some(v) => *v,
                None => {
                    return Err(Error::Invalid(format!(
                        "expression uses x{} but only {} coordinates were supplied",
                        i + 1,
                        x.len()
                    )))
                }
            },
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let num = a.eval(x)?;
                let den = b.eval(x)?;
                if den.value() == 0.0 {
                    return Err(Error::EvalDomain("division by zero".into()));
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                pow(base, b, x)?
            }
            Expr::Call(f, a) => {
                let u = a.eval(x)?;
                call(*f, u)?
            }
        })
    }

    /// Symbolic partial derivative with respect to zero-based coordinate `k`.
    /// Only trivial constant folding is applied.
    pub fn derivative(&self, k: usize) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Coord(i) => Num(if *i == k { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(k)),
            Add(a, b) => add(a.derivative(k), b.derivative(k)),
            Sub(a, b) => sub(a.derivative(k), b.derivative(k)),
            Mul(a, b) => add(
                mul(a.derivative(k), (**b).clone()),
                mul((**a).clone(), b.derivative(k)),
            ),
            Div(a, b) => {
                let da = a.derivative(k);
                let db = b.derivative(k);
                sub(
                    div(da, (**b).clone()),
                    div(mul((**a).clone(), db), pow_e((**b).clone(), Num(2.0))),
                )
            }
            Pow(a, b) => {
                let da = a.derivative(k);
                if let Num(p) = **b {
                    mul(mul(Num(p), pow_e((**a).clone(), Num(p - 1.0))), da)
                } else {
                    let db = b.derivative(k);
                    // a^b (b' ln a + b a'/a)
                    mul(
                        self.clone(),
                        add(
                            mul(db, Call(Func::Log, a.clone())),
                            div(mul((**b).clone(), da), (**a).clone()),
                        ),
                    )
                }
            }
            Call(f, a) => {
                let da = a.derivative(k);
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => Call(Func::Cos, Box::new(u)),
                    Func::Cos => neg(Call(Func::Sin, Box::new(u))),
                    Func::Tan => div(Num(1.0), pow_e(Call(Func::Cos, Box::new(u)), Num(2.0))),
                    Func::Exp => self.clone(),
                    Func::Log => div(Num(1.0), u),
                    Func::Sqrt => div(Num(0.5), self.clone()),
                    Func::Sinh => Call(Func::Cosh, Box::new(u)),
                    Func::Cosh => Call(Func::Sinh, Box::new(u)),
                };
                mul(outer, da)
            }
        }
    }
}

fn is_num(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Num(v) if *v == c)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        b
    } else if is_num(&b, 0.0) {
        a
    } else {
        Expr::Add(Box::new(a), Box::new(b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        neg(b)
    } else {
        Expr::Sub(Box::new(a), Box::new(b))
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        Expr::Num(0.0)
    } else if is_num(&a, 1.0) {
        b
    } else if is_num(&b, 1.0) {
        a
    } else {
        Expr::Mul(Box::new(a), Box::new(b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        Expr::Num(0.0)
    } else if is_num(&b, 1.0) {
        a
    } else {
        Expr::Div(Box::new(a), Box::new(b))
    }
}

fn pow_e(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        a
    } else if is_num(&b, 0.0) {
        Expr::Num(1.0)
    } else {
        Expr::Pow(Box::new(a), Box::new(b))
    }
}

fn pow<T: Scalar>(base: T, exponent: &Expr, x: &[T]) -> Result<T> {
    if let Expr::Num(p) = *exponent {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            if p < 0.0 && base.value() == 0.0 {
                return Err(Error::EvalDomain("zero raised to a negative power".into()));
            }
            return Ok(base.powi(p as i32));
        }
        let b = base.value();
        if b < 0.0 {
            return Err(Error::EvalDomain(
                "negative base with non-integer exponent".into(),
            ));
        }
        if b == 0.0 {
            if base.has_derivatives() || p < 0.0 {
                return Err(Error::EvalDomain(
                    "non-integer power is not differentiable at zero".into(),
                ));
            }
            return Ok(T::from_f64(0.0));
        }
        return Ok(base.powf(p));
    }
    let e = exponent.eval(x)?;
    if !e.has_derivatives() && !base.has_derivatives() {
        return Ok(T::from_f64(base.value().powf(e.value())));
    }
    if base.value() <= 0.0 {
        return Err(Error::EvalDomain(
            "variable exponent requires a positive base".into(),
        ));
    }
    Ok((e * base.ln()).exp())
}

fn call<T: Scalar>(f: Func, u: T) -> Result<T> {
    let v = u.value();
    Ok(match f {
        Func::Sin => u.sin(),
        Func::Cos => u.cos(),
        Func::Tan => {
            if v.cos() == 0.0 {
                return Err(Error::EvalDomain("tan at a pole".into()));
            }
            u.tan()
        }
        Func::Exp => u.exp(),
        Func::Log => {
            if v <= 0.0 {
                return Err(Error::EvalDomain(format!("log of non-positive value {v}")));
            }
            u.ln()
        }
        Func::Sqrt => {
            if v < 0.0 || (v == 0.0 && u.has_derivatives()) {
                return Err(Error::EvalDomain(format!("sqrt not differentiable at {v}")));
            }
            u.sqrt()
        }
        Func::Sinh => u.sinh(),
        Func::Cosh => u.cosh(),
    })
}

/// Prints a fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> Error {
        match self.src.get(self.pos) {
            Some(c) => Error::Syntax {
                offset: self.pos,
                message: format!("unexpected '{}'", char::from(*c)),
            },
            None => Error::Syntax {
                offset: self.pos,
                message: "unexpected end of input".into(),
            },
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        if i < s.len() && s[i] == b'.' {
            i += 1;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii slice");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = i;
                Ok(Expr::Num(v))
            }
            _ => Err(Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            }),
        }
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && s[i].is_ascii_alphanumeric() {
            i += 1;
        }
        let name = std::str::from_utf8(&s[start..i]).expect("ascii slice");
        self.pos = i;
        if let Some(f) = Func::from_name(name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if let Ok(idx) = digits.parse::<usize>() {
                if !digits.starts_with('0') && (1..=MAX_ARITY).contains(&idx) {
                    if idx > self.arity {
                        return Err(Error::CoordinateOutOfRange {
                            index: idx,
                            arity: self.arity,
                            offset: start,
                        });
                    }
                    return Ok(Expr::Coord(idx - 1));
                }
            }
        }
        Err(Error::UnknownIdentifier {
            name: name.to_string(),
            offset: start,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = Expr::parse("-x1^2 + 3*x1", 1).unwrap();
        assert_eq!(e.eval(&[2.0]).unwrap(), 2.0);
        let e = Expr::parse("2^3^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
        let e = Expr::parse("8/2/2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 2.0);
        let e = Expr::parse("2^-1", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 0.5);
    }

    #[test]
    fn syntax_offset() {
        match Expr::parse("x1 +* 2", 1) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Expr::parse("x3", 2),
            Err(Error::CoordinateOutOfRange { index: 3, arity: 2, .. })
        ));
        assert!(matches!(
            Expr::parse("foo(x1)", 2),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(Expr::parse("  ", 2), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("(x1", 2), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("log(x1)", 1).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::EvalDomain(_))));
        let e = Expr::parse("1/x1", 1).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::EvalDomain(_))));
    }

    #[test]
    fn print_round_trip() {
        for s in ["sin(x1)^2", "-(x1 - 2.5e-3) / cosh(x2)", "x1^x2", "--x1", "2^-x1^2"] {
            let e = Expr::parse(s, 2).unwrap();
            let again = Expr::parse(&e.to_string(), 2).unwrap();
            assert_eq!(e, again, "{s}");
        }
    }
}
