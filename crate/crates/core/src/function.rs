//! Real functions `f(t)` given as small arithmetic expressions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' int ('^' int)*)?      right associative, folded, 0..=12
//! atom  := number | 't' | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp | abs | sqrt
//! ```
//!
//! The whole input may instead be a catalog name: `identity`, `square`,
//! `cube`, `witch` (`1/(1+t^2)`) or `affine(a=.., b=..)` (`a*t+b`).

use std::fmt;

use thiserror::Error;

use crate::parse::{fmt_real, ParseError, Scanner};
use crate::sequence::GrowthClass;

pub const MAX_EXPONENT: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        [Func::Sin, Func::Cos, Func::Exp, Func::Abs, Func::Sqrt]
            .into_iter()
            .find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("exponent {value} out of range 0..={MAX_EXPONENT} at offset {offset}")]
    ExponentOutOfRange { offset: usize, value: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl FunctionError {
    pub fn offset(&self) -> usize {
        match self {
            FunctionError::Syntax(e) => e.offset,
            FunctionError::ExponentOutOfRange { offset, .. }
            | FunctionError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

/// Evaluation outside the domain of `f`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct DomainError {
    pub message: String,
}

fn domain(message: impl Into<String>) -> DomainError {
    DomainError {
        message: message.into(),
    }
}

/// A parsed function of one variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    expr: Expr,
}

impl FunctionSpec {
    pub fn from_expr(expr: Expr) -> Self {
        Self { expr }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn identity() -> Self {
        Self::from_expr(Expr::Var)
    }

    /// `a*t + b`
    pub fn affine(a: f64, b: f64) -> Self {
        Self::from_expr(Expr::Add(
            Box::new(Expr::Mul(Box::new(Expr::Const(a)), Box::new(Expr::Var))),
            Box::new(Expr::Const(b)),
        ))
    }

    pub fn parse(text: &str) -> Result<Self, FunctionError> {
        if let Some(f) = parse_catalog(text)? {
            return Ok(f);
        }
        let mut p = Parser {
            sc: Scanner::new(text),
        };
        let expr = p.expr()?;
        if !p.sc.at_end() {
            return Err(p.sc.unexpected("operator or end of input").into());
        }
        Ok(Self { expr })
    }

    pub fn eval(&self, t: f64) -> Result<f64, DomainError> {
        eval(&self.expr, t)
    }

    /// `self(inner(t))`
    pub fn compose(&self, inner: &FunctionSpec) -> FunctionSpec {
        FunctionSpec::from_expr(substitute(&self.expr, &inner.expr))
    }

    /// Growth of `(f(p_k))` given the growth of `(p_k)`.
    ///
    /// Tries interval arithmetic over the range of the input first (this is
    /// what makes `1/(1+t^2)` bounded on any input), then propagates a
    /// polynomial bound `c * k^d` through the expression.
    pub fn image_growth(&self, input: GrowthClass) -> GrowthClass {
        let range = match input.normalized() {
            GrowthClass::Bounded { m } => Interval::new(-m, m),
            _ => Interval::new(f64::NEG_INFINITY, f64::INFINITY),
        };
        let iv = interval(&self.expr, range);
        let m = iv.lo.abs().max(iv.hi.abs());
        if m.is_finite() {
            return GrowthClass::Bounded { m };
        }
        match input.as_polynomial() {
            Some((c, d)) => match poly_bound(&self.expr, (c, d), range) {
                Some((c, d)) if c.is_finite() => GrowthClass::Polynomial {
                    c: c * (1.0 + 1e-12),
                    d,
                }
                .normalized(),
                _ => GrowthClass::Unknown,
            },
            None => GrowthClass::Unknown,
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.expr, 0)
    }
}

fn parse_catalog(text: &str) -> Result<Option<FunctionSpec>, FunctionError> {
    let t = |e: Expr| Some(FunctionSpec::from_expr(e));
    let pow = |n| Expr::Pow(Box::new(Expr::Var), n);
    Ok(match text.trim() {
        "identity" => t(Expr::Var),
        "square" => t(pow(2)),
        "cube" => t(pow(3)),
        "witch" => t(Expr::Div(
            Box::new(Expr::Const(1.0)),
            Box::new(Expr::Add(Box::new(Expr::Const(1.0)), Box::new(pow(2)))),
        )),
        s if s.starts_with("affine") => {
            let mut sc = Scanner::new(text);
            sc.ident();
            sc.expect(b'(', "'('")?;
            let mut a = None;
            let mut b = None;
            loop {
                let (off, name) = sc.ident().ok_or_else(|| sc.unexpected("'a' or 'b'"))?;
                sc.expect(b'=', "'='")?;
                let (num_off, num) = sc.number(true).ok_or_else(|| sc.unexpected("number"))?;
                let v = parse_const(num_off, num)?;
                let slot = match name {
                    "a" => &mut a,
                    "b" => &mut b,
                    _ => {
                        return Err(FunctionError::UnknownIdentifier {
                            offset: off,
                            name: name.to_string(),
                        })
                    }
                };
                if slot.replace(v).is_some() {
                    return Err(ParseError::new(off, format!("'{name}' given twice")).into());
                }
                if sc.eat(b')') {
                    break;
                }
                sc.expect(b',', "',' or ')'")?;
            }
            if !sc.at_end() {
                return Err(sc.unexpected("end of input").into());
            }
            match (a, b) {
                (Some(a), Some(b)) => Some(FunctionSpec::affine(a, b)),
                _ => return Err(ParseError::new(sc.pos(), "affine needs both a and b").into()),
            }
        }
        _ => None,
    })
}

fn parse_const(offset: usize, text: &str) -> Result<f64, FunctionError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::new(offset, format!("number '{text}' is not a finite real")).into()),
    }
}

struct Parser<'a> {
    sc: Scanner<'a>,
}

impl Parser<'_> {
    fn expr(&mut self) -> Result<Expr, FunctionError> {
        let mut lhs = self.term()?;
        loop {
            if self.sc.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.sc.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, FunctionError> {
        let mut lhs = self.unary()?;
        loop {
            if self.sc.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.sc.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, FunctionError> {
        if self.sc.eat(b'-') {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, FunctionError> {
        let base = self.atom()?;
        if !self.sc.eat(b'^') {
            return Ok(base);
        }
        let mut chain = vec![self.exponent_literal()?];
        while self.sc.eat(b'^') {
            chain.push(self.exponent_literal()?);
        }
        let (offset, _) = chain[0];
        let mut value: Option<u64> = None;
        for &(_, e) in chain.iter().rev() {
            value = match value {
                None => Some(e),
                Some(v) => u32::try_from(v).ok().and_then(|v| e.checked_pow(v)),
            };
            if value.is_none() {
                break;
            }
        }
        match value {
            Some(v) if v <= u64::from(MAX_EXPONENT) => Ok(Expr::Pow(Box::new(base), v as u32)),
            _ => {
                let text = chain
                    .iter()
                    .map(|(_, e)| e.to_string())
                    .collect::<Vec<_>>()
                    .join("^");
                Err(FunctionError::ExponentOutOfRange {
                    offset,
                    value: text,
                })
            }
        }
    }

    fn exponent_literal(&mut self) -> Result<(usize, u64), FunctionError> {
        let (off, text) = self
            .sc
            .integer()
            .ok_or_else(|| self.sc.unexpected("integer exponent"))?;
        let v = text
            .parse::<u64>()
            .map_err(|_| FunctionError::ExponentOutOfRange {
                offset: off,
                value: text.to_string(),
            })?;
        Ok((off, v))
    }

    fn atom(&mut self) -> Result<Expr, FunctionError> {
        match self.sc.peek() {
            Some(b'(') => {
                self.sc.eat(b'(');
                let e = self.expr()?;
                self.sc.expect(b')', "')'")?;
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => {
                let (off, text) = self
                    .sc
                    .number(false)
                    .ok_or_else(|| self.sc.unexpected("number"))?;
                Ok(Expr::Const(parse_const(off, text)?))
            }
            Some(b) if b.is_ascii_lowercase() || b == b'_' => {
                let (off, name) = self.sc.ident().expect("peeked a letter");
                if name == "t" {
                    return Ok(Expr::Var);
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(FunctionError::UnknownIdentifier {
                        offset: off,
                        name: name.to_string(),
                    });
                };
                self.sc.expect(b'(', "'(' after function name")?;
                let arg = self.expr()?;
                self.sc.expect(b')', "')'")?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.sc.unexpected("number, 't', function or '('").into()),
        }
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        Expr::Const(_) | Expr::Var | Expr::Call(..) => 5,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if level(e) < min_level {
        f.write_str("(")?;
        write_expr(f, e, 0)?;
        return f.write_str(")");
    }
    match e {
        Expr::Const(c) if c.is_sign_negative() => write!(f, "({})", fmt_real(*c)),
        Expr::Const(c) => f.write_str(&fmt_real(*c)),
        Expr::Var => f.write_str("t"),
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_expr(f, a, 3)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_expr(f, a, 1)?;
            f.write_str(if matches!(e, Expr::Add(..)) { "+" } else { "-" })?;
            write_expr(f, b, 2)
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            write_expr(f, a, 2)?;
            f.write_str(if matches!(e, Expr::Mul(..)) { "*" } else { "/" })?;
            write_expr(f, b, 3)
        }
        Expr::Pow(a, n) => {
            write_expr(f, a, 5)?;
            write!(f, "^{n}")
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, 0)?;
            f.write_str(")")
        }
    }
}

fn finite(v: f64) -> Result<f64, DomainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("non-finite intermediate value {v}")))
    }
}

fn eval(e: &Expr, t: f64) -> Result<f64, DomainError> {
    let v = match e {
        Expr::Const(c) => *c,
        Expr::Var => t,
        Expr::Neg(a) => -eval(a, t)?,
        Expr::Add(a, b) => eval(a, t)? + eval(b, t)?,
        Expr::Sub(a, b) => eval(a, t)? - eval(b, t)?,
        Expr::Mul(a, b) => eval(a, t)? * eval(b, t)?,
        Expr::Div(a, b) => {
            let num = eval(a, t)?;
            let den = eval(b, t)?;
            if den == 0.0 {
                return Err(domain(format!("division by zero at t = {t}")));
            }
            num / den
        }
        Expr::Pow(a, n) => eval(a, t)?.powi(*n as i32),
        Expr::Call(func, a) => {
            let x = eval(a, t)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Abs => x.abs(),
                Func::Sqrt if x < 0.0 => {
                    return Err(domain(format!("sqrt of negative argument {x} at t = {t}")))
                }
                Func::Sqrt => x.sqrt(),
            }
        }
    };
    finite(v)
}

fn substitute(e: &Expr, inner: &Expr) -> Expr {
    let s = |a: &Expr| Box::new(substitute(a, inner));
    match e {
        Expr::Const(c) => Expr::Const(*c),
        Expr::Var => inner.clone(),
        Expr::Neg(a) => Expr::Neg(s(a)),
        Expr::Add(a, b) => Expr::Add(s(a), s(b)),
        Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
        Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
        Expr::Div(a, b) => Expr::Div(s(a), s(b)),
        Expr::Pow(a, n) => Expr::Pow(s(a), *n),
        Expr::Call(func, a) => Expr::Call(*func, s(a)),
    }
}

/// Closed interval over the extended reals with outward rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
}

const WHOLE: Interval = Interval {
    lo: f64::NEG_INFINITY,
    hi: f64::INFINITY,
};

impl Interval {
    fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn point(v: f64) -> Self {
        Self::new(v, v)
    }

    fn contains_zero(self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    fn add(self, o: Interval) -> Interval {
        Interval::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }

    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    fn mul(self, o: Interval) -> Interval {
        let pairs = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| mul_down(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| mul_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    fn recip(self) -> Interval {
        if self.contains_zero() {
            return WHOLE;
        }
        Interval::new(div_down(1.0, self.hi), div_up(1.0, self.lo))
    }

    fn div(self, o: Interval) -> Interval {
        if self == Interval::point(0.0) && !(o == Interval::point(0.0)) {
            return self;
        }
        self.mul(o.recip())
    }

    fn abs(self) -> Interval {
        if self.contains_zero() {
            Interval::new(0.0, (-self.lo).max(self.hi))
        } else if self.lo > 0.0 {
            self
        } else {
            self.neg()
        }
    }

    fn powi(self, n: u32) -> Interval {
        let pow_up = |m: f64| (0..n).fold(1.0, |acc, _| mul_up(acc, m));
        let pow_down = |m: f64| (0..n).fold(1.0, |acc, _| mul_down(acc, m));
        if n == 0 {
            return Interval::point(1.0);
        }
        if n.is_multiple_of(2) {
            let a = self.abs();
            Interval::new(pow_down(a.lo), pow_up(a.hi))
        } else {
            let lo = if self.lo >= 0.0 {
                pow_down(self.lo)
            } else {
                -pow_up(-self.lo)
            };
            let hi = if self.hi >= 0.0 {
                pow_up(self.hi)
            } else {
                -pow_down(-self.hi)
            };
            Interval::new(lo, hi)
        }
    }

    /// Widen by two ulps on each side, for library functions that are not
    /// correctly rounded.
    fn widen(self) -> Interval {
        Interval::new(self.lo.next_down().next_down(), self.hi.next_up().next_up())
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::INFINITY } else { s };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn add_down(a: f64, b: f64) -> f64 {
    -add_up(-a, -b)
}

fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

fn mul_down(a: f64, b: f64) -> f64 {
    -mul_up(-a, b)
}

fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() || b.is_infinite() || a.is_infinite() {
        return q;
    }
    // a - q*b is exact; its sign relative to b tells which way q was rounded.
    let r = (-q).mul_add(b, a);
    if (r > 0.0) == (b > 0.0) && r != 0.0 {
        q.next_up()
    } else {
        q
    }
}

fn div_down(a: f64, b: f64) -> f64 {
    -div_up(-a, b)
}

fn interval(e: &Expr, t: Interval) -> Interval {
    match e {
        Expr::Const(c) => Interval::point(*c),
        Expr::Var => t,
        Expr::Neg(a) => interval(a, t).neg(),
        Expr::Add(a, b) => interval(a, t).add(interval(b, t)),
        Expr::Sub(a, b) => interval(a, t).add(interval(b, t).neg()),
        Expr::Mul(a, b) => interval(a, t).mul(interval(b, t)),
        Expr::Div(a, b) => interval(a, t).div(interval(b, t)),
        Expr::Pow(a, n) => interval(a, t).powi(*n),
        Expr::Call(func, a) => {
            let x = interval(a, t);
            match func {
                Func::Sin | Func::Cos => Interval::new(-1.0, 1.0),
                Func::Exp => Interval::new(x.lo.exp(), x.hi.exp()).widen().abs_floor(),
                Func::Abs => x.abs(),
                Func::Sqrt => Interval::new(x.lo.max(0.0).sqrt(), x.hi.max(0.0).sqrt())
                    .widen()
                    .abs_floor(),
            }
        }
    }
}

impl Interval {
    /// Clamp a widened interval of a non-negative function back to `>= 0`.
    fn abs_floor(self) -> Interval {
        Interval::new(self.lo.max(0.0), self.hi)
    }
}

/// `(c, d)` with `|e(p_k)| <= c * max(k,1)^d` when `|p_k| <= c0 * max(k,1)^d0`.
fn poly_bound(e: &Expr, input: (f64, u32), range: Interval) -> Option<(f64, u32)> {
    match e {
        Expr::Const(c) => Some((c.abs(), 0)),
        Expr::Var => Some(input),
        Expr::Neg(a) | Expr::Call(Func::Abs, a) => poly_bound(a, input, range),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let (ca, da) = poly_bound(a, input, range)?;
            let (cb, db) = poly_bound(b, input, range)?;
            Some((ca + cb, da.max(db)))
        }
        Expr::Mul(a, b) => {
            let (ca, da) = poly_bound(a, input, range)?;
            let (cb, db) = poly_bound(b, input, range)?;
            Some((ca * cb, da.checked_add(db)?))
        }
        Expr::Div(a, b) => {
            let den = interval(b, range);
            let gap = if den.lo > 0.0 {
                den.lo
            } else if den.hi < 0.0 {
                -den.hi
            } else {
                return None;
            };
            let (ca, da) = poly_bound(a, input, range)?;
            Some((ca / gap, da))
        }
        Expr::Pow(a, n) => {
            let (c, d) = poly_bound(a, input, range)?;
            Some((c.powi(*n as i32), d.checked_mul(*n)?))
        }
        Expr::Call(Func::Sin | Func::Cos, _) => Some((1.0, 0)),
        Expr::Call(Func::Sqrt, a) => {
            let (c, d) = poly_bound(a, input, range)?;
            Some((c.sqrt(), d.div_ceil(2)))
        }
        Expr::Call(Func::Exp, a) => match poly_bound(a, input, range)? {
            (c, 0) => Some((c.exp(), 0)),
            _ => None,
        },
    }
}
