//! A small expression language for right-hand sides: constants, the time
//! variable `t`, state components `y1…yd`, `+ − * / ^` (integer exponents)
//! and the unary functions `sin`, `cos`, `exp`.
//!
//! Precedence: `^` binds tightest, then unary minus, then `* /`, then
//! `+ -`; binary operators associate left. The language stays deliberately
//! tiny — it feeds the solvers, nothing more.

use picard_core::series::{Monomial, PolyMap};
use std::collections::BTreeMap;
use std::fmt;

/// Parse or evaluation failure, with a byte position where meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub pos: Option<usize>,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{} (at byte {p})", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ExprError {}

fn err<T>(pos: impl Into<Option<usize>>, message: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError {
        pos: pos.into(),
        message: message.into(),
    })
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The time variable `t`.
    Time,
    /// State component, zero-based (`y1` parses to `State(0)`).
    State(usize),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power of a subexpression.
    Pow(Box<Expr>, i64),
}

// --- tokenizer ---

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Token::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Token::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Token::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent suffix like 1e-3
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut k = i + 1;
                    if k < bytes.len() && matches!(bytes[k] as char, '+' | '-') {
                        k += 1;
                    }
                    if k < bytes.len() && (bytes[k] as char).is_ascii_digit() {
                        i = k;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) => out.push((start, Token::Num(v))),
                    Err(_) => return err(start, format!("malformed number '{text}'")),
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
            }
            other => return err(i, format!("unexpected character '{other}'")),
        }
    }
    Ok(out)
}

// --- parser ---

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    dim: usize,
    src_len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.src_len, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<(), ExprError> {
        let at = self.here();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => err(at, format!("expected {what}")),
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        while let Some(op) = self.peek() {
            let make: fn(Box<Expr>, Box<Expr>) -> Expr = match op {
                Token::Plus => Expr::Add,
                Token::Minus => Expr::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.product()?;
            lhs = make(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek() {
            let make: fn(Box<Expr>, Box<Expr>) -> Expr = match op {
                Token::Star => Expr::Mul,
                Token::Slash => Expr::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = make(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut base = self.atom()?;
        while matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            let at = self.here();
            let negative = if matches!(self.peek(), Some(Token::Minus)) {
                self.bump();
                true
            } else {
                false
            };
            let exponent = match self.bump() {
                Some(Token::Num(v)) if v.fract() == 0.0 && v.abs() < 1e15 => *v as i64,
                _ => return err(at, "exponent must be an integer literal"),
            };
            base = Expr::Pow(Box::new(base), if negative { -exponent } else { exponent });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.here();
        match self.bump().cloned() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::LParen) => {
                let inner = self.sum()?;
                self.expect(&Token::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "t" => Ok(Expr::Time),
                "sin" | "cos" | "exp" => {
                    self.expect(&Token::LParen, &format!("'(' after {name}"))?;
                    let arg = Box::new(self.sum()?);
                    self.expect(&Token::RParen, "closing parenthesis")?;
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(arg),
                        "cos" => Expr::Cos(arg),
                        _ => Expr::Exp(arg),
                    })
                }
                _ if name.starts_with('y') => match name[1..].parse::<usize>() {
                    Ok(k) if k >= 1 && k <= self.dim => Ok(Expr::State(k - 1)),
                    Ok(k) => err(
                        at,
                        format!("state index y{k} out of range 1..={}", self.dim),
                    ),
                    Err(_) => err(at, format!("unknown identifier '{name}'")),
                },
                _ => err(at, format!("unknown identifier '{name}'")),
            },
            _ => err(at, "expected a value"),
        }
    }
}

/// Parse an expression over `t` and `y1…yd`.
pub fn parse_expression(src: &str, dim: usize) -> Result<Expr, ExprError> {
    if src.trim().is_empty() {
        return err(None, "empty expression");
    }
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        dim,
        src_len: src.len(),
    };
    let expr = parser.sum()?;
    if parser.pos < tokens.len() {
        return err(parser.here(), "trailing input after expression");
    }
    Ok(expr)
}

/// Evaluate at `(t, y)`. Division by zero and non-finite intermediate
/// results are errors rather than silent infinities.
pub fn eval_expression(expr: &Expr, t: f64, y: &[f64]) -> Result<f64, ExprError> {
    let v = match expr {
        Expr::Const(c) => *c,
        Expr::Time => t,
        Expr::State(i) => {
            if *i >= y.len() {
                return err(
                    None,
                    format!("state y{} beyond dimension {}", i + 1, y.len()),
                );
            }
            y[*i]
        }
        Expr::Neg(e) => -eval_expression(e, t, y)?,
        Expr::Sin(e) => eval_expression(e, t, y)?.sin(),
        Expr::Cos(e) => eval_expression(e, t, y)?.cos(),
        Expr::Exp(e) => eval_expression(e, t, y)?.exp(),
        Expr::Add(a, b) => eval_expression(a, t, y)? + eval_expression(b, t, y)?,
        Expr::Sub(a, b) => eval_expression(a, t, y)? - eval_expression(b, t, y)?,
        Expr::Mul(a, b) => eval_expression(a, t, y)? * eval_expression(b, t, y)?,
        Expr::Div(a, b) => {
            let denom = eval_expression(b, t, y)?;
            if denom == 0.0 {
                return err(None, "division by zero");
            }
            eval_expression(a, t, y)? / denom
        }
        Expr::Pow(base, k) => {
            let b = eval_expression(base, t, y)?;
            if *k < 0 && b == 0.0 {
                return err(None, "zero base with negative exponent");
            }
            b.powi(*k as i32)
        }
    };
    if !v.is_finite() {
        return err(None, "expression produced a non-finite value");
    }
    Ok(v)
}

/// Print in a form that reparses to the identical tree: binary and unary
/// nodes are fully parenthesised.
pub fn pretty(expr: &Expr) -> String {
    match expr {
        Expr::Const(c) => {
            if *c < 0.0 {
                format!("({c})")
            } else {
                format!("{c}")
            }
        }
        Expr::Time => "t".into(),
        Expr::State(i) => format!("y{}", i + 1),
        Expr::Neg(e) => format!("(-{})", pretty(e)),
        Expr::Sin(e) => format!("sin({})", pretty(e)),
        Expr::Cos(e) => format!("cos({})", pretty(e)),
        Expr::Exp(e) => format!("exp({})", pretty(e)),
        Expr::Add(a, b) => format!("({} + {})", pretty(a), pretty(b)),
        Expr::Sub(a, b) => format!("({} - {})", pretty(a), pretty(b)),
        Expr::Mul(a, b) => format!("({} * {})", pretty(a), pretty(b)),
        Expr::Div(a, b) => format!("({} / {})", pretty(a), pretty(b)),
        Expr::Pow(base, k) => {
            if *k < 0 {
                format!("({})^-{}", pretty(base), -k)
            } else {
                format!("({})^{}", pretty(base), k)
            }
        }
    }
}

// --- polynomial lowering ---

/// Sparse polynomial in `(t, y1…yd)` keyed by exponent tuples.
#[derive(Debug, Clone, Default)]
struct MultiPoly {
    terms: BTreeMap<(u32, Vec<u32>), f64>,
}

impl MultiPoly {
    fn constant(c: f64, dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((0, vec![0; dim]), c);
        }
        MultiPoly { terms }
    }

    fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            *terms.entry(k.clone()).or_insert(0.0) += v;
        }
        terms.retain(|_, v| *v != 0.0);
        MultiPoly { terms }
    }

    fn neg(&self) -> Self {
        MultiPoly {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<(u32, Vec<u32>), f64> = BTreeMap::new();
        for ((ta, ya), va) in &self.terms {
            for ((tb, yb), vb) in &other.terms {
                let key = (
                    ta + tb,
                    ya.iter().zip(yb).map(|(a, b)| a + b).collect::<Vec<u32>>(),
                );
                *terms.entry(key).or_insert(0.0) += va * vb;
            }
        }
        terms.retain(|_, v| *v != 0.0);
        MultiPoly { terms }
    }
}

fn lower(expr: &Expr, dim: usize) -> Option<MultiPoly> {
    match expr {
        Expr::Const(c) => Some(MultiPoly::constant(*c, dim)),
        Expr::Time => {
            let mut p = MultiPoly::default();
            p.terms.insert((1, vec![0; dim]), 1.0);
            Some(p)
        }
        Expr::State(i) => {
            let mut pows = vec![0; dim];
            pows[*i] = 1;
            let mut p = MultiPoly::default();
            p.terms.insert((0, pows), 1.0);
            Some(p)
        }
        Expr::Neg(e) => Some(lower(e, dim)?.neg()),
        Expr::Add(a, b) => Some(lower(a, dim)?.add(&lower(b, dim)?)),
        Expr::Sub(a, b) => Some(lower(a, dim)?.add(&lower(b, dim)?.neg())),
        Expr::Mul(a, b) => Some(lower(a, dim)?.mul(&lower(b, dim)?)),
        Expr::Pow(base, k) if *k >= 0 => {
            let base = lower(base, dim)?;
            let mut acc = MultiPoly::constant(1.0, dim);
            for _ in 0..*k {
                acc = acc.mul(&base);
            }
            Some(acc)
        }
        _ => None,
    }
}

/// Lower a system of component expressions to a polynomial field, when
/// every component is polynomial in `(t, y)`. Needed by the exact backend.
pub fn to_polynomial(exprs: &[Expr], dim: usize) -> Option<PolyMap<f64>> {
    let components = exprs
        .iter()
        .map(|e| {
            lower(e, dim).map(|p| {
                p.terms
                    .into_iter()
                    .map(|((t_pow, y_pows), coeff)| Monomial {
                        coeff,
                        t_pow,
                        y_pows,
                    })
                    .collect::<Vec<_>>()
            })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(PolyMap::new(dim, components))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Expr {
        parse_expression(src, 2).unwrap()
    }

    fn ev(src: &str, t: f64, y: &[f64]) -> f64 {
        eval_expression(&parse_expression(src, y.len()).unwrap(), t, y).unwrap()
    }

    #[test]
    fn variable_lookup_and_arithmetic() {
        assert_eq!(ev("y1", 0.0, &[2.0]), 2.0);
        assert_eq!(ev("t*y1 + sin(t)", 0.0, &[3.0]), 0.0);
        assert_eq!(ev("exp(t) - y1^2", 0.0, &[1.0]), 0.0);
        assert_eq!(ev("2^3", 0.0, &[0.0]), 8.0);
        assert_eq!(ev("cos(t)", 0.0, &[0.0]), 1.0);
    }

    #[test]
    fn hand_evaluated_table() {
        let cases: &[(&str, f64, &[f64], f64)] = &[
            ("1 + 2*3", 0.0, &[0.0], 7.0),
            ("(1 + 2)*3", 0.0, &[0.0], 9.0),
            ("2 - 3 - 4", 0.0, &[0.0], -5.0),
            ("12 / 3 / 2", 0.0, &[0.0], 2.0),
            ("-2^2", 0.0, &[0.0], -4.0),
            ("(-2)^2", 0.0, &[0.0], 4.0),
            ("2^2^3", 0.0, &[0.0], 64.0), // left associative
            ("t^3", 2.0, &[0.0], 8.0),
            ("y2 - y1", 0.0, &[1.5, 4.0], 2.5),
            ("sin(t)^2 + cos(t)^2", 0.7, &[0.0], 1.0),
            ("exp(0)", 5.0, &[0.0], 1.0),
            ("1/2 + 1/4", 0.0, &[0.0], 0.75),
            ("2*y1^2", 0.0, &[3.0], 18.0),
            ("-t", 1.5, &[0.0], -1.5),
            ("--t", 1.5, &[0.0], 1.5),
            ("3.5e-1 * 10", 0.0, &[0.0], 3.5),
            ("t*t*t", 3.0, &[0.0], 27.0),
            ("(t + y1)^2", 1.0, &[2.0], 9.0),
            ("2^-1", 0.0, &[0.0], 0.5),
            ("1 - -1", 0.0, &[0.0], 2.0),
        ];
        for (src, t, y, want) in cases {
            let got = ev(src, *t, y);
            assert!((got - want).abs() < 1e-12, "{src}: {got} vs {want}");
        }
    }

    #[test]
    fn error_positions_and_kinds() {
        assert!(parse_expression("", 1).is_err());
        let e = parse_expression("1 + $", 1).unwrap_err();
        assert_eq!(e.pos, Some(4));
        assert!(parse_expression("foo(1)", 1)
            .unwrap_err()
            .message
            .contains("unknown identifier"));
        assert!(parse_expression("y3", 2)
            .unwrap_err()
            .message
            .contains("out of range"));
        assert!(parse_expression("2^t", 1)
            .unwrap_err()
            .message
            .contains("integer literal"));
        assert!(parse_expression("1 + ", 1).is_err());
        assert!(parse_expression("(1", 1).is_err());
        // division by zero is an evaluation error
        let div = parse_expression("1/(t - t)", 1).unwrap();
        assert!(eval_expression(&div, 3.0, &[0.0])
            .unwrap_err()
            .message
            .contains("division"));
    }

    #[test]
    fn round_trip_corpus() {
        let corpus: Vec<String> = {
            let mut v: Vec<String> = [
                "1",
                "t",
                "y1",
                "y2",
                "-t",
                "t + y1",
                "t - y1",
                "t*y2",
                "t/y1",
                "t^2",
                "sin(t)",
                "cos(y1)",
                "exp(t*y1)",
                "-(t + y1)",
                "t + y1 + y2",
                "t*y1*y2",
                "1 - 2 - 3",
                "2^2^2",
                "-2^2",
                "(t + 1)^3",
                "sin(cos(exp(t)))",
                "t*sin(y1) + y2/2",
                "0.5*y1 - 0.25*y2",
                "1e3*t",
                "y1^2 - y2^2",
                "t^2*y1 - t*y2 + 1",
                "exp(-t)",
                "(y1 + y2)/(1 + t^2)",
                "-y1^3",
                "cos(t)*cos(t) + sin(t)*sin(t)",
                "t/2/3",
                "((t))",
                "2*(3 + 4*(5 + t))",
                "y1/y2",
                "exp(t)^2",
                "-(-(t))",
                "1/(1 + exp(-t))",
                "t - -y1",
                "3.25",
                "0.125*t^4",
                "sin(t - y1)",
                "cos(t + 0.5)",
                "exp(y2 - y1)",
                "t^3 - 3*t^2 + 3*t - 1",
                "y1*(1 - y1)",
                "2^-2*t",
                "(t^2)^3",
                "sin(t)/cos(t)",
                "y2^5",
                "1 + t + t^2/2 + t^3/6",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            assert_eq!(v.len(), 50);
            v.sort();
            v
        };
        for src in corpus {
            let tree = p(&src);
            let printed = pretty(&tree);
            let reparsed = parse_expression(&printed, 2)
                .unwrap_or_else(|e| panic!("pretty of {src} -> {printed}: {e}"));
            assert_eq!(tree, reparsed, "{src} -> {printed}");
        }
    }

    #[test]
    fn polynomial_lowering_matches_evaluation() {
        let exprs = vec![p("t^2*y1 - 2*y2 + 1"), p("y1*y2 + t")];
        let map = to_polynomial(&exprs, 2).expect("polynomial");
        for (t, y) in [(0.0, [1.0, 2.0]), (0.5, [0.3, -1.2]), (-1.0, [2.0, 0.0])] {
            let direct: Vec<f64> = exprs
                .iter()
                .map(|e| eval_expression(e, t, &y).unwrap())
                .collect();
            let lowered = map.eval(t, &y);
            for (a, b) in direct.iter().zip(&lowered) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn non_polynomial_expressions_do_not_lower() {
        assert!(to_polynomial(&[p("sin(t)")], 2).is_none());
        assert!(to_polynomial(&[p("1/y1")], 2).is_none());
        assert!(to_polynomial(&[p("t^-1")], 2).is_none());
        assert!(to_polynomial(&[p("exp(y1)")], 2).is_none());
    }
}
