//! Text syntax shared by cache files, operator files and golden data.
//!
//! Expressions use integers, `q`, `v`, `M1`, `M2`, `L1`, `L2`, named
//! sub-expressions, `tau(...)`, `+ - * /`, `^` (or `**`) with integer
//! exponents, parentheses, and juxtaposition for multiplication.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::mpoly::MPolyQMM;
use crate::arith::qlaurent::QLaurent;
use crate::arith::ratfunc::RatFuncQMM;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Self { line, col, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str, line0: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (line0 + li, i + 1);
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col });
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if c.is_ascii_digit() {
                let s = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let txt: String = chars[s..i].iter().collect();
                push(&mut out, Tok::Num(txt.parse().unwrap()));
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let s = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[s..i].iter().collect()));
                continue;
            }
            let tok = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' if chars.get(i + 1) == Some(&'*') => {
                    i += 1;
                    Tok::Caret
                }
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' | '[' | '{' => Tok::LParen,
                ')' | ']' | '}' => Tok::RParen,
                _ => return Err(ParseError::new(line, col, format!("unexpected character '{c}'"))),
            };
            push(&mut out, tok);
            i += 1;
        }
    }
    Ok(out)
}

/// Parsed expression tree.
#[derive(Clone, Debug)]
pub enum Expr {
    Num(BigInt),
    Name(String, usize, usize),
    Call(String, Box<Expr>, usize, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize, usize),
    Pow(Box<Expr>, i64, usize, usize),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(ParseError::new(l, c, msg))
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            Expr::Neg(Box::new(self.product()?))
        } else {
            if self.peek() == Some(&Tok::Plus) {
                self.pos += 1;
            }
            self.product()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                Some(Tok::Slash) => {
                    let (l, c) = self.here();
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.power()?), l, c);
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let (l, c) = self.here();
        self.pos += 1;
        let e = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), e, l, c))
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let mut neg = false;
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.pos += 1;
        }
        if self.peek() == Some(&Tok::Minus) {
            neg = true;
            self.pos += 1;
        }
        let v = match self.peek() {
            Some(Tok::Num(n)) => n.to_i64().filter(|x| *x < 1 << 20),
            _ => return self.err("expected an integer exponent"),
        };
        let Some(v) = v else { return self.err("exponent too large") };
        self.pos += 1;
        if paren {
            if self.peek() != Some(&Tok::RParen) {
                return self.err("expected ')'");
            }
            self.pos += 1;
        }
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (l, c) = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) && s != "q" && s != "v" && !s.starts_with('M') && !s.starts_with('L') {
                    self.pos += 1;
                    let e = self.sum()?;
                    if self.peek() != Some(&Tok::RParen) {
                        return self.err("expected ')'");
                    }
                    self.pos += 1;
                    return Ok(Expr::Call(s, Box::new(e), l, c));
                }
                Ok(Expr::Name(s, l, c))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.power()?)))
            }
            _ => self.err("expected a number, name or '('"),
        }
    }
}

/// Parses one expression; `line0` is the 1-based line of the first line.
pub fn parse_expr_at(src: &str, line0: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(src, line0)?;
    let end = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((line0, 1));
    let mut p = Parser { toks, pos: 0, end };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected token");
    }
    Ok(e)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    parse_expr_at(src, 1)
}

/// A ring an expression can be evaluated in.
pub trait ExprTarget: Sized + Clone {
    fn from_int(n: &BigInt) -> Self;
    fn var(name: &str) -> Option<Self>;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, String>;
    fn pow(&self, e: i64) -> Result<Self, String>;
    fn call(name: &str, arg: &Self) -> Result<Self, String> {
        let _ = arg;
        Err(format!("unknown function '{name}'"))
    }
}

/// Generic binary power with an optional inverse for negative exponents.
pub fn pow_by_squaring<T: ExprTarget>(x: &T, e: i64, one: T) -> Result<T, String> {
    let base = if e < 0 { one.div(x)? } else { x.clone() };
    let mut e = e.unsigned_abs();
    let mut acc = one;
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&b);
        }
        e >>= 1;
        if e > 0 {
            b = b.mul(&b);
        }
    }
    Ok(acc)
}

pub fn eval_expr<T: ExprTarget>(e: &Expr, env: &HashMap<String, T>) -> Result<T, ParseError> {
    let wrap = |l: usize, c: usize| move |m: String| ParseError::new(l, c, m);
    Ok(match e {
        Expr::Num(n) => T::from_int(n),
        Expr::Name(s, l, c) => match env.get(s) {
            Some(v) => v.clone(),
            None => T::var(s).ok_or_else(|| ParseError::new(*l, *c, format!("unresolved name '{s}'")))?,
        },
        Expr::Call(f, a, l, c) => T::call(f, &eval_expr(a, env)?).map_err(wrap(*l, *c))?,
        Expr::Neg(a) => eval_expr(a, env)?.neg(),
        Expr::Add(a, b) => eval_expr(a, env)?.add(&eval_expr(b, env)?),
        Expr::Sub(a, b) => eval_expr(a, env)?.sub(&eval_expr(b, env)?),
        Expr::Mul(a, b) => eval_expr(a, env)?.mul(&eval_expr(b, env)?),
        Expr::Div(a, b, l, c) => eval_expr(a, env)?.div(&eval_expr(b, env)?).map_err(wrap(*l, *c))?,
        Expr::Pow(a, k, l, c) => eval_expr(a, env)?.pow(*k).map_err(wrap(*l, *c))?,
    })
}

impl ExprTarget for QLaurent {
    fn from_int(n: &BigInt) -> Self {
        QLaurent::from_rational(BigRational::from_integer(n.clone()))
    }
    fn var(name: &str) -> Option<Self> {
        match name {
            "v" => Some(QLaurent::v_pow(1)),
            "q" => Some(QLaurent::v_pow(6)),
            _ => None,
        }
    }
    fn add(&self, o: &Self) -> Self {
        QLaurent::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        QLaurent::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        QLaurent::mul(self, o)
    }
    fn neg(&self) -> Self {
        QLaurent::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self, String> {
        if o.is_zero() {
            return Err("division by zero".into());
        }
        self.div_exact(o).ok_or_else(|| "division is not exact in Laurent polynomials".into())
    }
    fn pow(&self, e: i64) -> Result<Self, String> {
        pow_by_squaring(self, e, QLaurent::one())
    }
}

impl ExprTarget for RatFuncQMM {
    fn from_int(n: &BigInt) -> Self {
        RatFuncQMM::from_rational(BigRational::from_integer(n.clone()))
    }
    fn var(name: &str) -> Option<Self> {
        match name {
            "q" => Some(MPolyQMM::q().into()),
            "M1" => Some(MPolyQMM::m1().into()),
            "M2" => Some(MPolyQMM::m2().into()),
            _ => None,
        }
    }
    fn add(&self, o: &Self) -> Self {
        RatFuncQMM::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFuncQMM::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFuncQMM::mul(self, o)
    }
    fn neg(&self) -> Self {
        RatFuncQMM::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self, String> {
        RatFuncQMM::div(self, o).map_err(|e| e.to_string())
    }
    fn pow(&self, e: i64) -> Result<Self, String> {
        pow_by_squaring(self, e, RatFuncQMM::one())
    }
    fn call(name: &str, arg: &Self) -> Result<Self, String> {
        match name {
            "tau" => Ok(arg.swap_m()),
            _ => Err(format!("unknown function '{name}'")),
        }
    }
}

pub fn parse_laurent(src: &str) -> Result<QLaurent, ParseError> {
    eval_expr(&parse_expr(src)?, &HashMap::new())
}

pub fn parse_ratfunc(src: &str) -> Result<RatFuncQMM, ParseError> {
    eval_expr(&parse_expr(src)?, &HashMap::new())
}

/// Parses a polynomial in `q, M1, M2`; rational results are rejected.
pub fn parse_poly(src: &str) -> Result<MPolyQMM, ParseError> {
    let r = parse_ratfunc(src)?;
    if !r.is_polynomial() {
        return Err(ParseError::new(1, 1, "expected a polynomial"));
    }
    Ok(r.into_parts().0)
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_monomial(names: &[&str], exps: &[u32]) -> String {
    let parts: Vec<String> = names
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e > 0)
        .map(|(n, &e)| if e == 1 { n.to_string() } else { format!("{n}^{e}") })
        .collect();
    parts.join("*")
}

/// Writes `c * mono` terms as a signed sum; `terms` must be non-empty.
pub fn fmt_sum(terms: &[(BigRational, String)]) -> String {
    let mut s = String::new();
    for (i, (c, m)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if m.is_empty() {
            s.push_str(&fmt_rational(&a));
        } else if a.is_one() {
            s.push_str(m);
        } else {
            s.push_str(&format!("{}*{}", fmt_rational(&a), m));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Polynomial in `q` only, descending.
pub fn fmt_q_poly(terms: &[(u32, BigRational)]) -> String {
    let mut t: Vec<_> = terms.iter().filter(|(_, c)| !c.is_zero()).collect();
    t.sort_by(|a, b| b.0.cmp(&a.0));
    let items: Vec<(BigRational, String)> = t.iter().map(|(e, c)| (c.clone(), fmt_monomial(&["q"], &[*e]))).collect();
    fmt_sum(&items)
}

/// Monomial text such as `M1^2*M2`, empty for the unit monomial.
pub fn fmt_m_monomial(a1: u32, a2: u32) -> String {
    fmt_monomial(&["M1", "M2"], &[a1, a2])
}

pub fn fmt_l_monomial(b1: u32, b2: u32) -> String {
    fmt_monomial(&["L1", "L2"], &[b1, b2])
}

/// A statement of a line-oriented file: `NAME = expr` or a bare expression.
#[derive(Clone, Debug)]
pub enum Statement {
    Define { name: String, expr: Expr, line: usize },
    Bare { expr: Expr, line: usize },
    Header { key: String, value: String, line: usize },
}

/// Splits a file into statements. Lines starting with whitespace continue
/// the previous statement; `#` starts a comment; `key: value` lines whose
/// key is a plain word are headers.
pub fn parse_statements(text: &str) -> Result<Vec<Statement>, ParseError> {
    let mut groups: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let cont = raw.starts_with(' ') || raw.starts_with('\t');
        match groups.last_mut() {
            Some(g) if cont => {
                g.1.push('\n');
                g.1.push_str(line);
            }
            _ => groups.push((i + 1, line.to_string())),
        }
    }
    let mut out = Vec::new();
    for (line, src) in groups {
        let first = src.lines().next().unwrap_or("");
        if let Some((k, v)) = first.split_once(':') {
            let k = k.trim();
            if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !k.chars().next().unwrap().is_ascii_digit() {
                out.push(Statement::Header { key: k.to_string(), value: v.trim().to_string(), line });
                continue;
            }
        }
        if let Some((lhs, rhs)) = src.split_once('=') {
            let name = lhs.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ParseError::new(line, 1, "bad definition name"));
            }
            // keep columns meaningful for errors on the first line
            let pad = " ".repeat(lhs.len() + 1);
            let expr = parse_expr_at(&format!("{pad}{rhs}"), line)?;
            out.push(Statement::Define { name: name.to_string(), expr, line });
        } else {
            out.push(Statement::Bare { expr: parse_expr_at(&src, line)?, line });
        }
    }
    Ok(out)
}

/// Evaluates definitions in order and returns the environment together
/// with the sum of the bare statements (`None` if there are none).
pub fn eval_statements<T: ExprTarget>(
    stmts: &[Statement],
    mut env: HashMap<String, T>,
) -> Result<(HashMap<String, T>, Option<T>, Vec<(String, String)>), ParseError> {
    let mut body: Option<T> = None;
    let mut headers = Vec::new();
    for s in stmts {
        match s {
            Statement::Define { name, expr, .. } => {
                let v = eval_expr(expr, &env)?;
                env.insert(name.clone(), v);
            }
            Statement::Bare { expr, .. } => {
                let v = eval_expr(expr, &env)?;
                body = Some(match body {
                    None => v,
                    Some(b) => b.add(&v),
                });
            }
            Statement::Header { key, value, .. } => headers.push((key.clone(), value.clone())),
        }
    }
    Ok((env, body, headers))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Name(s, ..) => write!(f, "{s}"),
            Expr::Call(s, a, ..) => write!(f, "{s}({a})"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b, ..) => write!(f, "({a})/({b})"),
            Expr::Pow(a, k, ..) => write!(f, "({a})^{k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_round_trip() {
        for s in ["q + 1 + q^-1", "v^3 + v^-3", "-2*q^5 + 3", "0", "1/2*q"] {
            let x = parse_laurent(s).unwrap();
            assert_eq!(x.to_string(), s);
        }
        assert_eq!(parse_laurent("(q-1)(q+1)").unwrap().to_string(), "q^2 - 1");
        assert_eq!(parse_laurent("q**2").unwrap().to_string(), "q^2");
    }

    #[test]
    fn polynomials() {
        let p = parse_poly("-q^6*M1^3*M2*(q^3*M1-1)").unwrap();
        assert_eq!(p.to_string(), "-q^9*M1^4*M2 + q^6*M1^3*M2");
        assert_eq!(parse_poly("2 q M1 M2^2").unwrap().to_string(), "2*q*M1*M2^2");
        let t = parse_ratfunc("tau(M1^2 + q*M2)").unwrap();
        assert_eq!(t.to_string(), "q*M1 + M2^2");
        let r = parse_ratfunc("(q*M1 - q)/(M1 - 1)").unwrap();
        assert_eq!(r.to_string(), "q");
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_poly("q + * M1").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
        let e = parse_poly("q + F9").unwrap_err();
        assert!(e.msg.contains("F9"), "{e}");
        assert!(parse_laurent("1/(q-1)").is_err());
    }

    #[test]
    fn statements() {
        let text = "vars: q M1 M2\nF = M1 +\n  M2\n# comment\n2*F\n-F\n";
        let st = parse_statements(text).unwrap();
        let (env, body, hdr) = eval_statements::<RatFuncQMM>(&st, HashMap::new()).unwrap();
        assert_eq!(hdr[0].0, "vars");
        assert_eq!(env["F"].to_string(), "M1 + M2");
        assert_eq!(body.unwrap().to_string(), "M1 + M2");
    }
}

/// Header line written by [`serialize_operator`].
pub const OPERATOR_HEADER: &str = "vars: q M1 M2 L1 L2; normalform: M-before-L";

/// Contents of an operator file: named sub-expressions and the operator.
#[derive(Clone, Debug)]
pub struct OperatorFile {
    pub defs: HashMap<String, crate::ore::OreOp>,
    pub op: Option<crate::ore::OreOp>,
    pub headers: Vec<(String, String)>,
}

pub fn parse_operator_file(text: &str) -> Result<OperatorFile, ParseError> {
    let st = parse_statements(text)?;
    let (defs, op, headers) = eval_statements::<crate::ore::OreOp>(&st, HashMap::new())?;
    for (k, v) in &headers {
        if k == "vars" {
            let vars: Vec<&str> = v.split(';').next().unwrap_or("").split_whitespace().collect();
            if vars.iter().any(|x| !["q", "M1", "M2", "L1", "L2"].contains(x)) {
                return Err(ParseError::new(1, 1, format!("unsupported variable list '{v}'")));
            }
        }
    }
    Ok(OperatorFile { defs, op, headers })
}

/// Parses an operator: the sum of the file's bare lines.
pub fn parse_operator(text: &str) -> Result<crate::ore::OreOp, ParseError> {
    parse_operator_file(text)?.op.ok_or_else(|| ParseError::new(1, 1, "no operator terms"))
}

/// Canonical text: one term per line, L-monomials descending, then
/// M-monomials descending; non-polynomial coefficients take one line.
pub fn serialize_operator(p: &crate::ore::OreOp) -> String {
    let mut s = String::from(OPERATOR_HEADER);
    s.push('\n');
    if p.is_zero() {
        s.push_str("0\n");
        return s;
    }
    let lm = |b: (u32, u32)| {
        let m = [("L1", b.0), ("L2", b.1)]
            .iter()
            .filter(|x| x.1 > 0)
            .map(|(n, e)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
            .collect::<Vec<_>>()
            .join(" ");
        if m.is_empty() {
            "1".to_string()
        } else {
            m
        }
    };
    for (b, c) in p.terms().iter().rev() {
        if !c.is_polynomial() {
            s.push_str(&format!("({}) / ({}) * {}\n", c.num(), c.den(), lm(*b)));
            continue;
        }
        let mut by_m: std::collections::BTreeMap<(u32, u32), Vec<(u32, BigRational)>> = Default::default();
        for (e, x) in c.num().terms() {
            by_m.entry((e.1, e.2)).or_default().push((e.0, x.clone()));
        }
        for ((a1, a2), qp) in by_m.iter().rev() {
            let qs = fmt_q_poly(qp);
            let qs = if qp.len() > 1 { format!("({qs})") } else { qs };
            let mm = [("M1", *a1), ("M2", *a2)]
                .iter()
                .filter(|x| x.1 > 0)
                .map(|(n, e)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
                .collect::<Vec<_>>()
                .join(" ");
            let mm = if mm.is_empty() { "1".to_string() } else { mm };
            s.push_str(&format!("{} * {} * {}\n", qs, mm, lm(*b)));
        }
    }
    s
}

#[cfg(test)]
mod operator_tests {
    use super::*;
    use crate::ore::OreOp;

    #[test]
    fn right_multiplication_is_normalized() {
        let p = parse_operator("L1*M1").unwrap();
        let q = parse_operator("q*M1*L1").unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn serialize_round_trip() {
        let src = "F = q*M1 - M2\n-q^2*M1*(q*M1 - 1)*F*L1^2\n+ (M1 + 1)/(q*M2 - 1)*L2\n3\n";
        let p = parse_operator(src).unwrap();
        let text = serialize_operator(&p);
        assert!(text.starts_with(OPERATOR_HEADER));
        let back = parse_operator(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(serialize_operator(&back), text);
        assert_eq!(serialize_operator(&OreOp::zero()).lines().nth(1), Some("0"));
    }

    #[test]
    fn unresolved_names_are_reported() {
        let e = parse_operator("F7*L1").unwrap_err();
        assert!(e.msg.contains("F7"));
    }
}
