//! Expression language for time-varying coefficients.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | "t" | func "(" expr ")" | "(" expr ")"
//!          | "piecewise" "(" ("t" "<=" number ":" expr ",")+ "else" ":" expr ")"
//! func    := sqrt | exp | log | sin | cos | abs
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is −4 and `2^-1` is 0.5. Piecewise thresholds must increase; the first
//! branch with t ≤ threshold wins.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
}

impl Func {
    const ALL: [Func; 6] = [Func::Sqrt, Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Abs];

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Piecewise {
        branches: Vec<(f64, Expr)>,
        otherwise: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at t = {t}")]
    DivisionByZero { t: f64 },
    #[error("log of nonpositive value {arg} at t = {t}")]
    LogDomain { t: f64, arg: f64 },
    #[error("sqrt of negative value {arg} at t = {t}")]
    SqrtDomain { t: f64, arg: f64 },
    #[error("non-finite result at t = {t}")]
    NonFinite { t: f64 },
    #[error("expressions are defined for t >= 0, got t = {t}")]
    NegativeTime { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Colon,
    Le,
    End,
}

#[derive(Debug, Clone, Copy)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn describe(src: &str, t: &Token) -> String {
    match t.tok {
        Tok::End => "end of input".to_string(),
        _ => format!("{:?}", &src[t.start..t.end]),
    }
}

fn lex(src: &str) -> std::result::Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = |tok| Token {
            tok,
            start,
            end: start + 1,
        };
        let token = match c {
            b'+' => single(Tok::Plus),
            b'-' => single(Tok::Minus),
            b'*' => single(Tok::Star),
            b'/' => single(Tok::Slash),
            b'^' => single(Tok::Caret),
            b'(' => single(Tok::LParen),
            b')' => single(Tok::RParen),
            b',' => single(Tok::Comma),
            b':' => single(Tok::Colon),
            b'<' if bytes.get(i + 1) == Some(&b'=') => Token {
                tok: Tok::Le,
                start,
                end: start + 2,
            },
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["number".into()],
                    found: format!("{text:?}"),
                })?;
                Token {
                    tok: Tok::Num(v),
                    start,
                    end: j,
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                Token {
                    tok: Tok::Ident,
                    start,
                    end: j,
                }
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["expression".into()],
                    found: format!("{ch:?}"),
                });
            }
        };
        i = token.end;
        out.push(token);
    }
    out.push(Token {
        tok: Tok::End,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = std::result::Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Token {
        self.toks[self.pos]
    }

    fn text(&self, t: &Token) -> &'a str {
        &self.src[t.start..t.end]
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(ParseError {
            offset: t.start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: describe(self.src, &t),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if self.peek().tok == tok {
            self.pos += 1;
            Ok(())
        } else {
            self.error(&[what])
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<()> {
        let t = self.peek();
        if t.tok == Tok::Ident && self.text(&t) == word {
            self.pos += 1;
            Ok(())
        } else {
            self.error(&[&format!("'{word}'")])
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.peek().tok == Tok::Minus {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let neg = if self.peek().tok == Tok::Minus {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.error(&["number"]),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        match t.tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident => {
                let name = self.text(&t);
                if name == "t" {
                    self.pos += 1;
                    return Ok(Expr::T);
                }
                if name == "piecewise" {
                    self.pos += 1;
                    return self.piecewise();
                }
                match Func::from_name(name) {
                    Some(f) => {
                        self.pos += 1;
                        self.expect(Tok::LParen, "'('")?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => self.error(&["number", "'t'", "function name", "'('"]),
                }
            }
            _ => self.error(&["number", "'t'", "function name", "'('", "'-'"]),
        }
    }

    fn piecewise(&mut self) -> PResult<Expr> {
        self.expect(Tok::LParen, "'('")?;
        let mut branches: Vec<(f64, Expr)> = Vec::new();
        loop {
            let t = self.peek();
            if t.tok == Tok::Ident && self.text(&t) == "else" {
                if branches.is_empty() {
                    return self.error(&["'t'"]);
                }
                self.pos += 1;
                self.expect(Tok::Colon, "':'")?;
                let otherwise = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                return Ok(Expr::Piecewise {
                    branches,
                    otherwise: Box::new(otherwise),
                });
            }
            self.expect_word("t")?;
            self.expect(Tok::Le, "'<='")?;
            let at = self.peek().start;
            let c = self.signed_number()?;
            if let Some((prev, _)) = branches.last() {
                if c <= *prev {
                    return Err(ParseError {
                        offset: at,
                        expected: vec![format!("threshold greater than {prev:?}")],
                        found: format!("{c:?}"),
                    });
                }
            }
            self.expect(Tok::Colon, "':'")?;
            let e = self.expr()?;
            self.expect(Tok::Comma, "','")?;
            branches.push((c, e));
        }
    }
}

/// Parses an expression in the coefficient language.
pub fn parse(src: &str) -> std::result::Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    if p.peek().tok == Tok::End {
        return p.error(&["expression"]);
    }
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.error(&["operator", "end of input"]);
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, t: f64) -> std::result::Result<f64, EvalError> {
        if !(t >= 0.0) {
            return Err(EvalError::NegativeTime { t });
        }
        let v = self.eval_inner(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t })
        }
    }

    fn eval_inner(&self, t: f64) -> std::result::Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::Neg(e) => -e.eval_inner(t)?,
            Expr::Bin(op, l, r) => {
                let a = l.eval_inner(t)?;
                let b = r.eval_inner(t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero { t });
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval_inner(t)?;
                match f {
                    Func::Sqrt if x < 0.0 => return Err(EvalError::SqrtDomain { t, arg: x }),
                    Func::Sqrt => x.sqrt(),
                    Func::Log if x <= 0.0 => return Err(EvalError::LogDomain { t, arg: x }),
                    Func::Log => x.ln(),
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Abs => x.abs(),
                }
            }
            Expr::Piecewise { branches, otherwise } => match branches.iter().find(|(c, _)| t <= *c) {
                Some((_, e)) => e.eval_inner(t)?,
                None => otherwise.eval_inner(t)?,
            },
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t })
        }
    }

    /// True when the expression does not mention t.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::T => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Bin(_, l, r) => l.is_constant() && r.is_constant(),
            Expr::Piecewise { .. } => false,
        }
    }

    /// Jumps at piecewise thresholds larger than 1e-9 (relative to the value),
    /// as (threshold, left value, right value).
    pub fn discontinuities(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        self.collect_jumps(&mut out);
        out
    }

    fn collect_jumps(&self, out: &mut Vec<(f64, f64, f64)>) {
        match self {
            Expr::Num(_) | Expr::T => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_jumps(out),
            Expr::Bin(_, l, r) => {
                l.collect_jumps(out);
                r.collect_jumps(out);
            }
            Expr::Piecewise { branches, otherwise } => {
                for (i, (c, e)) in branches.iter().enumerate() {
                    let next = branches.get(i + 1).map(|b| &b.1).unwrap_or(otherwise);
                    if *c < 0.0 {
                        continue;
                    }
                    if let (Ok(l), Ok(r)) = (e.eval(*c), next.eval(*c)) {
                        if (l - r).abs() > 1e-9 * l.abs().max(1.0) {
                            out.push((*c, l, r));
                        }
                    }
                    e.collect_jumps(out);
                }
                otherwise.collect_jumps(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::T => write!(f, "t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Piecewise { branches, otherwise } => {
                write!(f, "piecewise(")?;
                for (c, e) in branches {
                    write!(f, "t <= {c:?}: {e}, ")?;
                }
                write!(f, "else: {otherwise})")
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse(s)
    }
}

fn parse_entry(name: &str, index: &str, src: &str) -> Result<Expr> {
    parse(src).map_err(|e| Error::Input(format!("{name}[{index}] = {src:?}: {e}")))
}

/// Matrix of coefficient expressions, e.g. Q(t).
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    name: String,
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
    constant: Option<DMatrix<f64>>,
}

impl ExprMatrix {
    pub fn parse(name: &str, src: &[Vec<String>]) -> Result<Self> {
        let rows = src.len();
        let cols = src.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || src.iter().any(|r| r.len() != cols) {
            return Err(Error::Input(format!("{name} must be a nonempty rectangular array")));
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for (i, row) in src.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                entries.push(parse_entry(name, &format!("{i},{j}"), s)?);
            }
        }
        Ok(Self::from_exprs(name, rows, cols, entries))
    }

    /// Constant matrix.
    pub fn constant(name: &str, m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| Expr::Num(m[(i, j)]))
            .collect();
        Self::from_exprs(name, m.nrows(), m.ncols(), entries)
    }

    /// Every entry equal to `e` on the diagonal, zero elsewhere.
    pub fn scalar_identity(name: &str, s: usize, e: Expr) -> Self {
        let entries = (0..s * s)
            .map(|k| if k / s == k % s { e.clone() } else { Expr::Num(0.0) })
            .collect();
        Self::from_exprs(name, s, s, entries)
    }

    fn from_exprs(name: &str, rows: usize, cols: usize, entries: Vec<Expr>) -> Self {
        let constant = if entries.iter().all(Expr::is_constant) {
            let vals: Option<Vec<f64>> = entries.iter().map(|e| e.eval(0.0).ok()).collect();
            vals.map(|v| DMatrix::from_row_slice(rows, cols, &v))
        } else {
            None
        };
        Self {
            name: name.to_string(),
            rows,
            cols,
            entries,
            constant,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_constant(&self) -> bool {
        self.constant.is_some()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.cols + j]
    }

    pub fn eval(&self, t: f64) -> Result<DMatrix<f64>> {
        if let Some(c) = &self.constant {
            return Ok(c.clone());
        }
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.entries[i * self.cols + j]
                    .eval(t)
                    .map_err(|source| Error::CoefficientEval {
                        name: self.name.clone(),
                        index: format!("{i},{j}"),
                        t,
                        source,
                    })?;
            }
        }
        Ok(m)
    }

    /// Piecewise jumps in any entry, labelled with the entry index.
    pub fn discontinuities(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (c, l, r) in self.entry(i, j).discontinuities() {
                    out.push(format!("{}[{i},{j}] jumps at t = {c:?} from {l:e} to {r:e}", self.name));
                }
            }
        }
        out
    }
}

/// Vector of coefficient expressions, e.g. g(t).
#[derive(Debug, Clone, PartialEq)]
pub struct ExprVector {
    inner: ExprMatrix,
}

impl ExprVector {
    pub fn parse(name: &str, src: &[String]) -> Result<Self> {
        let col: Vec<Vec<String>> = src.iter().map(|s| vec![s.clone()]).collect();
        Ok(Self {
            inner: ExprMatrix::parse(name, &col)?,
        })
    }

    pub fn zeros(name: &str, s: usize) -> Self {
        Self {
            inner: ExprMatrix::constant(name, &DMatrix::zeros(s, 1)),
        }
    }

    pub fn from_exprs(name: &str, exprs: Vec<Expr>) -> Self {
        let n = exprs.len();
        Self {
            inner: ExprMatrix::from_exprs(name, n, 1, exprs),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.rows
    }

    pub fn is_empty(&self) -> bool {
        self.inner.rows == 0
    }

    pub fn is_constant(&self) -> bool {
        self.inner.is_constant()
    }

    pub fn is_zero(&self) -> bool {
        self.inner
            .constant
            .as_ref()
            .is_some_and(|c| c.iter().all(|&v| v == 0.0))
    }

    pub fn eval(&self, t: f64) -> Result<DVector<f64>> {
        let m = self.inner.eval(t)?;
        Ok(DVector::from_column_slice(m.as_slice()))
    }

    pub fn discontinuities(&self) -> Vec<String> {
        self.inner.discontinuities()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, t: f64) -> f64 {
        parse(src).unwrap().eval(t).unwrap()
    }

    #[test]
    fn basic_values() {
        assert!((ev("1/(1+sqrt(t))", 4.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ev("2+3*t^2", 2.0), 14.0);
        assert_eq!(ev("piecewise(t<=1000: 1000, else: 1000000/t)", 2000.0), 500.0);
        assert_eq!(ev("piecewise(t<=1000: 1000, else: 1000000/t)", 1000.0), 1000.0);
        assert_eq!(ev("t", 3.5), 3.5);
        assert_eq!(ev("exp(-t)", 0.0), 1.0);
        assert_eq!(ev("1e6", 0.0), 1e6);
        assert_eq!(ev("2.5E-1", 0.0), 0.25);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("8/4/2", 0.0), 1.0);
        assert_eq!(ev("8-4-2", 0.0), 2.0);
        assert_eq!(ev("-t*3", 2.0), -6.0);
    }

    #[test]
    fn domain_faults_are_reported() {
        let e = parse("1000000/t").unwrap();
        assert_eq!(e.eval(0.0), Err(EvalError::DivisionByZero { t: 0.0 }));
        assert!(matches!(
            parse("log(t)").unwrap().eval(0.0),
            Err(EvalError::LogDomain { .. })
        ));
        assert!(matches!(
            parse("sqrt(t-1)").unwrap().eval(0.0),
            Err(EvalError::SqrtDomain { .. })
        ));
        assert!(matches!(
            parse("exp(t)").unwrap().eval(1000.0),
            Err(EvalError::NonFinite { .. })
        ));
        assert!(matches!(
            parse("t").unwrap().eval(-1.0),
            Err(EvalError::NegativeTime { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse("1 + * 2").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.iter().any(|s| s == "number"));
        let e = parse("sqrt(t").unwrap_err();
        assert_eq!(e.offset, 6);
        assert_eq!(e.expected, vec!["')'".to_string()]);
        let e = parse("foo(t)").unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(parse("").is_err());
        assert!(parse("1 2").is_err());
        assert!(parse("t $ 2").is_err());
        let e = parse("piecewise(t<=2: 1, t<=1: 2, else: 3)").unwrap_err();
        assert_eq!(e.offset, 22);
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "1/(1+sqrt(t))",
            "-2^2 + 3*t - log(1+t)/cos(t)",
            "piecewise(t<=-1: 0, t<=1000: 1000, else: 1000000/t)",
            "abs(sin(t))^0.5 - exp(-t^2)",
        ] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src}");
        }
    }

    #[test]
    fn jumps_are_detected() {
        assert!(parse("piecewise(t<=1000: 1000, else: 1000000/t)")
            .unwrap()
            .discontinuities()
            .is_empty());
        let j = parse("piecewise(t<=1: 0, else: 1)").unwrap().discontinuities();
        assert_eq!(j, vec![(1.0, 0.0, 1.0)]);
    }

    #[test]
    fn matrices_and_vectors() {
        let id = ExprMatrix::parse("Q", &[vec!["1".into(), "0".into()], vec!["0".into(), "1".into()]]).unwrap();
        assert!(id.is_constant());
        assert_eq!(id.eval(3.0).unwrap(), DMatrix::<f64>::identity(2, 2));
        let trig = ExprMatrix::parse("Q", &[vec!["sin(t)".into(), "cos(t)".into()]]).unwrap();
        let m = trig.eval(0.0).unwrap();
        assert_eq!((m[(0, 0)], m[(0, 1)]), (0.0, 1.0));
        let bad = ExprMatrix::parse("Q", &[vec!["1".into(), "1/t".into()]]).unwrap();
        match bad.eval(0.0) {
            Err(Error::CoefficientEval { index, .. }) => assert_eq!(index, "0,1"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ExprMatrix::parse("Q", &[vec!["1".into()], vec![]]).is_err());
        let g = ExprVector::parse("g", &["1/(1+sqrt(t))".into()]).unwrap();
        assert_eq!(g.eval(0.0).unwrap()[0], 1.0);
        assert!(ExprVector::zeros("g", 3).is_zero());
    }
}
