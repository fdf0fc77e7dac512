//! The sl3 colored Jones polynomial of the torus knots `T(2, b)`.
//!
//! With `q = v^6`, `[n] = (v^{3n} - v^{-3n}) / (v^3 - v^{-3})`,
//! `d = [n1+1][n2+1][n1+n2+2]/[2]` and `θ = q^{(n1²+n1n2+n2²)/3 + n1 + n2}`,
//! the value `f_{b,n1,n2}` is `θ^{-2b}/d` times a signed sum of
//! `D(a, c) = d_{a,c} θ_{a,c}^{b/2}` over three families of shifted colors.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;


use crate::arith::modp::PrimeField;
use crate::arith::qlaurent::QLaurent;
use crate::arith::ArithError;

#[derive(thiserror::Error, Debug)]
pub enum JonesError {
    #[error("b = {0} is not an odd positive integer")]
    InvalidKnot(i64),
    #[error("twist exponent {a}/{d} gives a non-integral v-exponent at ({n1}, {n2})")]
    NonIntegralTwist { n1: u32, n2: u32, a: i64, d: i64 },
    #[error("unlucky specialization v0 = {v0}, p = {p}: {reason}")]
    UnluckySpecialization { v0: u64, p: u64, reason: String },
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The torus knot `T(2, b)` with `b` odd and positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusKnot {
    b: u32,
}

impl TorusKnot {
    pub fn new(b: i64) -> Result<Self, JonesError> {
        if b < 1 || b % 2 == 0 || b > 1_000_000 {
            return Err(JonesError::InvalidKnot(b));
        }
        Ok(Self { b: b as u32 })
    }

    pub fn trefoil() -> Self {
        Self { b: 3 }
    }

    pub fn b(&self) -> u32 {
        self.b
    }
}

/// Highest weight `n1 ω1 + n2 ω2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color {
    pub n1: u32,
    pub n2: u32,
}

impl Color {
    pub fn new(n1: u32, n2: u32) -> Self {
        Self { n1, n2 }
    }
}

/// `[n]`; `[-n] = -[n]`.
pub fn quantum_integer(n: i64) -> QLaurent {
    let m = n.abs();
    let s = if n < 0 { -1 } else { 1 };
    QLaurent::from_terms((0..m).map(|k| (3 * (m - 1 - 2 * k), BigRational::from_integer(s.into()))))
}

/// `[n1+1][n2+1][n1+n2+2]/[2]`.
pub fn quantum_dim(c: Color) -> QLaurent {
    QLaurent::from_terms(dim_terms(c.n1, c.n2).into_iter().map(|(e, x)| (e, BigRational::from_integer(x.into()))))
}

/// v-exponent of `θ^{a/d}` at the color `(n1, n2)`, if integral.
pub fn twist_exponent(n1: u32, n2: u32, a: i64, d: i64) -> Option<i64> {
    let (n1, n2) = (n1 as i64, n2 as i64);
    let e6 = 2 * (n1 * n1 + n1 * n2 + n2 * n2) + 6 * (n1 + n2);
    let x = e6 * a;
    if d == 0 || x % d != 0 {
        None
    } else {
        Some(x / d)
    }
}

/// `θ^{a/d}` as a monomial in `v`.
pub fn twist_pow(c: Color, a: i64, d: i64) -> Result<QLaurent, JonesError> {
    if ![1, 2, 3, 6].contains(&d) {
        return Err(JonesError::NonIntegralTwist { n1: c.n1, n2: c.n2, a, d });
    }
    twist_exponent(c.n1, c.n2, a, d)
        .map(QLaurent::v_pow)
        .ok_or(JonesError::NonIntegralTwist { n1: c.n1, n2: c.n2, a, d })
}

/// Integer terms of `d_{a,c}` as a sparse Laurent polynomial in `v`.
fn dim_terms(a: u32, c: u32) -> Vec<(i64, i64)> {
    let qi = |n: i64| -> Vec<(i64, i64)> { (0..n).map(|k| (3 * (n - 1 - 2 * k), 1)).collect() };
    let prod = |x: &[(i64, i64)], y: &[(i64, i64)]| -> Vec<(i64, i64)> {
        let mut m: HashMap<i64, i64> = HashMap::new();
        for &(e1, c1) in x {
            for &(e2, c2) in y {
                *m.entry(e1 + e2).or_insert(0) += c1 * c2;
            }
        }
        let mut v: Vec<_> = m.into_iter().filter(|t| t.1 != 0).collect();
        v.sort_unstable();
        v
    };
    let (a, c) = (a as i64, c as i64);
    let num = prod(&prod(&qi(a + 1), &qi(c + 1)), &qi(a + c + 2));
    // exact division by [2] = v^3 + v^-3, from the top
    let mut rem: std::collections::BTreeMap<i64, i64> = num.into_iter().collect();
    let mut out = Vec::new();
    while let Some((&e, &x)) = rem.iter().next_back() {
        rem.remove(&e);
        let k = e - 3;
        out.push((k, x));
        let t = rem.entry(k - 3).or_insert(0);
        *t -= x;
        if *t == 0 {
            rem.remove(&(k - 3));
        }
    }
    out.reverse();
    out
}

/// Memoized building blocks for symbolic evaluation.
struct SymbolicEvaluator {
    b: u32,
    dims: HashMap<(u32, u32), Vec<(i64, i64)>>,
}

impl SymbolicEvaluator {
    fn new(k: TorusKnot) -> Self {
        Self { b: k.b, dims: HashMap::new() }
    }

    fn dim(&mut self, a: u32, c: u32) -> &[(i64, i64)] {
        self.dims.entry((a, c)).or_insert_with(|| dim_terms(a, c))
    }

    fn add_term(&mut self, acc: &mut HashMap<i64, i128>, a: u32, c: u32, sign: i128) {
        let sh = twist_exponent(a, c, self.b as i64, 2).expect("θ^{b/2} has integral v-exponent");
        for &(e, x) in self.dim(a, c) {
            *acc.entry(e + sh).or_insert(0) += sign * x as i128;
        }
    }

    fn eval(&mut self, c: Color) -> Result<QLaurent, JonesError> {
        let (n1, n2) = (c.n1, c.n2);
        let mut acc: HashMap<i64, i128> = HashMap::new();
        for_each_summand(n1, n2, |a, c, s| self.add_term(&mut acc, a, c, s as i128));
        let mut num: Vec<(i64, i128)> = acc.into_iter().filter(|t| t.1 != 0).collect();
        num.sort_unstable();
        let den = self.dim(n1, n2).to_vec();
        let quo = match div_exact_i128(&num, &den) {
            Some(Ok(q)) => q,
            Some(Err(())) => return Err(JonesError::Inconsistent(format!("division by d at ({n1}, {n2}) is not exact"))),
            None => {
                // overflow: redo with arbitrary precision
                let n = QLaurent::from_terms(num.iter().map(|&(e, x)| (e, BigRational::from_integer(BigInt::from(x)))));
                let d = quantum_dim(c);
                let q = n
                    .div_exact(&d)
                    .ok_or_else(|| JonesError::Inconsistent(format!("division by d at ({n1}, {n2}) is not exact")))?;
                q.terms().iter().map(|(e, x)| (*e, x.to_integer())).collect()
            }
        };
        let sh = twist_exponent(n1, n2, -2 * self.b as i64, 1).unwrap();
        let out = QLaurent::from_terms(quo.into_iter().map(|(e, x)| (e + sh, BigRational::from_integer(x))));
        if !out.is_integral_in_q() {
            return Err(JonesError::Inconsistent(format!("f at ({n1}, {n2}) is not a Laurent polynomial in q")));
        }
        Ok(out)
    }
}

/// Calls `f(a, c, sign)` for every summand `± D(a, c)` of the triple sum.
fn for_each_summand(n1: u32, n2: u32, mut f: impl FnMut(u32, u32, i64)) {
    let (n1, n2) = (n1 as i64, n2 as i64);
    let sgn = |k: i64| if k % 2 == 0 { 1 } else { -1 };
    for l in 0..=n1.min(n2) {
        for k in 0..=(n1 - l) {
            f((2 * n1 - 2 * k - 2 * l) as u32, (2 * n2 + k - 2 * l) as u32, sgn(k));
        }
        for k in 0..=(n2 - l) {
            f((2 * n1 + k - 2 * l) as u32, (2 * n2 - 2 * k - 2 * l) as u32, sgn(k));
        }
        f((2 * n1 - 2 * l) as u32, (2 * n2 - 2 * l) as u32, -1);
    }
}

/// Exact division of sparse integer Laurent polynomials with `i128`
/// arithmetic. `None` on overflow, `Some(Err)` if the division is not exact.
#[allow(clippy::type_complexity)]
fn div_exact_i128(num: &[(i64, i128)], den: &[(i64, i64)]) -> Option<Result<Vec<(i64, BigInt)>, ()>> {
    if num.is_empty() {
        return Some(Ok(Vec::new()));
    }
    let lo = num[0].0;
    let hi = num.last().unwrap().0;
    let (dlo, dhi) = (den[0].0, den.last().unwrap().0);
    let lc = den.last().unwrap().1 as i128;
    let mut r = vec![0i128; (hi - lo + 1) as usize];
    for &(e, x) in num {
        r[(e - lo) as usize] = x;
    }
    let mut out = Vec::new();
    let span = dhi - dlo;
    let mut top = hi;
    while top - lo >= span {
        let x = r[(top - lo) as usize];
        if x != 0 {
            if x % lc != 0 {
                return Some(Err(()));
            }
            let t = x / lc;
            let shift = top - dhi;
            for &(de, dc) in den {
                let idx = (de + shift - lo) as usize;
                r[idx] = r[idx].checked_sub(t.checked_mul(dc as i128)?)?;
            }
            out.push((shift, BigInt::from(t)));
        }
        top -= 1;
    }
    if r.iter().any(|&x| x != 0) {
        return Some(Err(()));
    }
    out.reverse();
    Some(Ok(out))
}

/// Exact value of `f_{b,n1,n2}` as a Laurent polynomial.
pub fn torus_jones(k: TorusKnot, c: Color) -> Result<QLaurent, JonesError> {
    SymbolicEvaluator::new(k).eval(c)
}

const SER: usize = 4;

/// Truncated power series in `ε` at `v = v0 + ε`, precision 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Ser([u64; SER]);

impl Ser {
    fn add_scaled(&mut self, o: &Ser, s: i64, fp: &PrimeField) {
        for i in 0..SER {
            self.0[i] = if s > 0 { fp.add(self.0[i], o.0[i]) } else { fp.sub(self.0[i], o.0[i]) };
        }
    }

    fn mul(&self, o: &Ser, fp: &PrimeField) -> Ser {
        let mut r = [0u64; SER];
        for i in 0..SER {
            for j in 0..SER - i {
                r[i + j] = fp.mul_add(r[i + j], self.0[i], o.0[j]);
            }
        }
        Ser(r)
    }

    fn sub(&self, o: &Ser, fp: &PrimeField) -> Ser {
        let mut r = *self;
        r.add_scaled(o, -1, fp);
        r
    }

    fn valuation(&self) -> Option<usize> {
        self.0.iter().position(|&x| x != 0)
    }

    /// Exact quotient when `o` has a nonzero constant term.
    fn div_unit(&self, o: &Ser, fp: &PrimeField) -> Ser {
        let inv0 = fp.inv(o.0[0]).expect("unit series");
        let mut r = [0u64; SER];
        for i in 0..SER {
            let mut x = self.0[i];
            for j in 1..=i {
                x = fp.sub(x, fp.mul(o.0[j], r[i - j]));
            }
            r[i] = fp.mul(x, inv0);
        }
        Ser(r)
    }
}

/// Series evaluation of building blocks at `v = v0 + ε`.
struct ModEvaluator {
    fp: PrimeField,
    v0: u64,
    b: u32,
    binv: [u64; SER],
    v0_inv: u64,
    ds: HashMap<(u32, u32), Ser>,
    summands: Vec<Vec<Option<Ser>>>,
    two: Ser,
    denom: Ser,
}

impl ModEvaluator {
    fn new(k: TorusKnot, v0: u64, fp: &PrimeField) -> Result<Self, JonesError> {
        let unlucky = |reason: &str| JonesError::UnluckySpecialization { v0, p: fp.p(), reason: reason.to_string() };
        let v = v0 % fp.p();
        if v == 0 {
            return Err(unlucky("v0 is divisible by p"));
        }
        let mut binv = [1u64; SER];
        for (i, slot) in binv.iter_mut().enumerate().skip(1) {
            *slot = fp.inv(i as u64).expect("p > 3");
        }
        let mut ev = Self {
            fp: fp.clone(),
            v0: v,
            b: k.b,
            binv,
            v0_inv: fp.inv(v).unwrap(),
            ds: HashMap::new(),
            summands: Vec::new(),
            two: Ser([0; SER]),
            denom: Ser([0; SER]),
        };
        // v^3 - v^-3 must be a unit: q0 != 1
        ev.denom = ev.vpow(3).sub(&ev.vpow(-3), fp);
        if ev.denom.0[0] == 0 {
            return Err(unlucky("q0 = 1 mod p"));
        }
        ev.two = ev.vpow(3);
        let t = ev.vpow(-3);
        ev.two.add_scaled(&t, 1, fp);
        if ev.two.0[0] == 0 {
            return Err(unlucky("q0 = -1 mod p, so [2] vanishes"));
        }
        Ok(ev)
    }

    /// `(v0 + ε)^e`.
    fn vpow(&self, e: i64) -> Ser {
        let fp = &self.fp;
        let base = if e >= 0 { fp.pow(self.v0, e as u64) } else { fp.pow(self.v0_inv, e.unsigned_abs()) };
        // binomial series (1 + ε/v0)^e
        let mut r = [0u64; SER];
        let mut coef = 1u64;
        let ef = fp.from_i64(e);
        let mut vi = 1u64;
        for (i, slot) in r.iter_mut().enumerate() {
            if i > 0 {
                coef = fp.mul(fp.mul(coef, fp.sub(ef, (i - 1) as u64)), self.binv[i]);
                vi = fp.mul(vi, self.v0_inv);
            }
            *slot = fp.mul(fp.mul(base, coef), vi);
        }
        Ser(r)
    }

    fn qint(&self, n: i64) -> Ser {
        let num = self.vpow(3 * n).sub(&self.vpow(-3 * n), &self.fp);
        num.div_unit(&self.denom, &self.fp)
    }

    fn dim(&mut self, a: u32, c: u32) -> Ser {
        if let Some(s) = self.ds.get(&(a, c)) {
            return *s;
        }
        let fp = self.fp.clone();
        let (a64, c64) = (a as i64, c as i64);
        let x = self.qint(a64 + 1).mul(&self.qint(c64 + 1), &fp).mul(&self.qint(a64 + c64 + 2), &fp);
        let x = x.div_unit(&self.two, &fp);
        self.ds.insert((a, c), x);
        x
    }

    fn summand(&mut self, a: u32, c: u32) -> Ser {
        let (ai, ci) = (a as usize, c as usize);
        if ai >= self.summands.len() {
            self.summands.resize(ai + 1, Vec::new());
        }
        if ci >= self.summands[ai].len() {
            self.summands[ai].resize(ci + 1, None);
        }
        if let Some(s) = self.summands[ai][ci] {
            return s;
        }
        let d = self.dim(a, c);
        let sh = twist_exponent(a, c, self.b as i64, 2).unwrap();
        let s = d.mul(&self.vpow(sh), &self.fp);
        self.summands[ai][ci] = Some(s);
        s
    }

    fn eval(&mut self, c: Color) -> Result<u64, JonesError> {
        let fp = self.fp.clone();
        let mut acc = Ser([0; SER]);
        let mut terms = Vec::new();
        for_each_summand(c.n1, c.n2, |a, cc, s| terms.push((a, cc, s)));
        // plain u64 accumulation; at most a few 10^4 terms, each < 2^31
        let mut pos = [0u64; SER];
        let mut neg = [0u64; SER];
        for (a, cc, s) in terms {
            let t = self.summand(a, cc);
            let dst = if s > 0 { &mut pos } else { &mut neg };
            for i in 0..SER {
                dst[i] += t.0[i];
            }
        }
        for i in 0..SER {
            acc.0[i] = fp.sub(pos[i] % fp.p(), neg[i] % fp.p());
        }
        let d = self.dim(c.n1, c.n2);
        let nu = d.valuation().ok_or_else(|| JonesError::UnluckySpecialization {
            v0: self.v0,
            p: fp.p(),
            reason: format!("d vanishes to order > 3 at ({}, {})", c.n1, c.n2),
        })?;
        if acc.0[..nu].iter().any(|&x| x != 0) {
            return Err(JonesError::Inconsistent(format!("numerator does not vanish with d at ({}, {})", c.n1, c.n2)));
        }
        let val = fp.mul(acc.0[nu], fp.inv(d.0[nu]).unwrap());
        let sh = twist_exponent(c.n1, c.n2, -2 * self.b as i64, 1).unwrap();
        Ok(fp.mul(val, self.vpow(sh).0[0]))
    }
}

/// `f_{b,n1,n2}` at `q = v0^6` modulo `p`, computed in the prime field.
pub fn torus_jones_mod(k: TorusKnot, c: Color, v0: u64, fp: &PrimeField) -> Result<u64, JonesError> {
    ModEvaluator::new(k, v0, fp)?.eval(c)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TableMode {
    Symbolic,
    Modular { v0: u64, p: u64 },
}

impl fmt::Display for TableMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableMode::Symbolic => write!(f, "symbolic"),
            TableMode::Modular { v0, p } => write!(f, "modular v0={v0} p={p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Entries {
    Symbolic(Vec<QLaurent>),
    Modular(Vec<u64>),
}

/// Values of `f_{b,n1,n2}` on the square `[0, n_max]²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceTable {
    knot: TorusKnot,
    n_max: u32,
    mode: TableMode,
    entries: Entries,
}

impl SequenceTable {
    pub fn knot(&self) -> TorusKnot {
        self.knot
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn mode(&self) -> &TableMode {
        &self.mode
    }

    pub fn len(&self) -> usize {
        let w = self.n_max as usize + 1;
        w * w
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n1: i64, n2: i64) -> bool {
        n1 >= 0 && n2 >= 0 && n1 <= self.n_max as i64 && n2 <= self.n_max as i64
    }

    fn idx(&self, n1: u32, n2: u32) -> usize {
        assert!(n1 <= self.n_max && n2 <= self.n_max, "index ({n1}, {n2}) outside table");
        n1 as usize * (self.n_max as usize + 1) + n2 as usize
    }

    pub fn symbolic(&self, n1: u32, n2: u32) -> Option<&QLaurent> {
        match &self.entries {
            Entries::Symbolic(v) => Some(&v[self.idx(n1, n2)]),
            Entries::Modular(_) => None,
        }
    }

    pub fn modular(&self, n1: u32, n2: u32) -> Option<u64> {
        match &self.entries {
            Entries::Modular(v) => Some(v[self.idx(n1, n2)]),
            Entries::Symbolic(_) => None,
        }
    }

    /// Build from a function on the square (used for synthetic sequences).
    pub fn from_modular_fn(knot: TorusKnot, n_max: u32, v0: u64, p: u64, f: impl Fn(u32, u32) -> u64) -> Self {
        let w = n_max + 1;
        let vals = (0..w).flat_map(|i| (0..w).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self { knot, n_max, mode: TableMode::Modular { v0, p }, entries: Entries::Modular(vals) }
    }

    pub fn from_symbolic_fn(knot: TorusKnot, n_max: u32, f: impl Fn(u32, u32) -> QLaurent) -> Self {
        let w = n_max + 1;
        let vals = (0..w).flat_map(|i| (0..w).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self { knot, n_max, mode: TableMode::Symbolic, entries: Entries::Symbolic(vals) }
    }

    /// Cache file text: a header then `b n1 n2 : value` records.
    pub fn to_cache_text(&self) -> String {
        let mut s = format!("# qholonomic sequence table\n# mode: {}\n# b: {}\n# nmax: {}\n", self.mode, self.knot.b, self.n_max);
        for n1 in 0..=self.n_max {
            for n2 in 0..=self.n_max {
                let v = match &self.entries {
                    Entries::Symbolic(v) => v[self.idx(n1, n2)].to_string(),
                    Entries::Modular(v) => v[self.idx(n1, n2)].to_string(),
                };
                s.push_str(&format!("{} {} {} : {}\n", self.knot.b, n1, n2, v));
            }
        }
        s
    }

    pub fn from_cache_text(text: &str) -> Result<Self, JonesError> {
        let bad = |m: &str| JonesError::Cache(m.to_string());
        let mut mode = None;
        let mut b = None;
        let mut n_max = None;
        let mut recs: Vec<(u32, u32, String)> = Vec::new();
        for line in text.lines() {
            if let Some(h) = line.strip_prefix("# ") {
                if let Some(m) = h.strip_prefix("mode: ") {
                    mode = Some(parse_mode(m).ok_or_else(|| bad("bad mode"))?);
                } else if let Some(x) = h.strip_prefix("b: ") {
                    b = Some(x.trim().parse::<i64>().map_err(|_| bad("bad b"))?);
                } else if let Some(x) = h.strip_prefix("nmax: ") {
                    n_max = Some(x.trim().parse::<u32>().map_err(|_| bad("bad nmax"))?);
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (lhs, rhs) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let f: Vec<u32> = lhs.split_whitespace().map(|x| x.parse().map_err(|_| bad("bad index"))).collect::<Result<_, _>>()?;
            if f.len() != 3 {
                return Err(bad("expected `b n1 n2 : value`"));
            }
            recs.push((f[1], f[2], rhs.trim().to_string()));
        }
        let (mode, b, n_max) = (mode.ok_or_else(|| bad("no mode"))?, b.ok_or_else(|| bad("no b"))?, n_max.ok_or_else(|| bad("no nmax"))?);
        let knot = TorusKnot::new(b)?;
        let w = n_max as usize + 1;
        if recs.len() != w * w {
            return Err(bad("record count does not match nmax"));
        }
        let entries = match mode {
            TableMode::Symbolic => {
                let mut v = vec![QLaurent::zero(); w * w];
                for (n1, n2, s) in recs {
                    let x = crate::format::parse_laurent(&s).map_err(|e| bad(&e.to_string()))?;
                    v[n1 as usize * w + n2 as usize] = x;
                }
                Entries::Symbolic(v)
            }
            TableMode::Modular { .. } => {
                let mut v = vec![0u64; w * w];
                for (n1, n2, s) in recs {
                    v[n1 as usize * w + n2 as usize] = s.parse().map_err(|_| bad("bad residue"))?;
                }
                Entries::Modular(v)
            }
        };
        Ok(Self { knot, n_max, mode, entries })
    }
}

fn parse_mode(s: &str) -> Option<TableMode> {
    let s = s.trim();
    if s == "symbolic" {
        return Some(TableMode::Symbolic);
    }
    let rest = s.strip_prefix("modular ")?;
    let mut v0 = None;
    let mut p = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        match k {
            "v0" => v0 = v.parse().ok(),
            "p" => p = v.parse().ok(),
            _ => return None,
        }
    }
    Some(TableMode::Modular { v0: v0?, p: p? })
}

/// Fill `[0, n_max]²`.
pub fn jones_table(k: TorusKnot, n_max: u32, mode: &TableMode) -> Result<SequenceTable, JonesError> {
    let w = n_max as usize + 1;
    let entries = match mode {
        TableMode::Symbolic => {
            let mut ev = SymbolicEvaluator::new(k);
            let mut v = Vec::with_capacity(w * w);
            for n1 in 0..=n_max {
                for n2 in 0..=n_max {
                    v.push(ev.eval(Color::new(n1, n2))?);
                }
            }
            Entries::Symbolic(v)
        }
        TableMode::Modular { v0, p } => {
            let fp = PrimeField::new(*p)?;
            let mut ev = ModEvaluator::new(k, *v0, &fp)?;
            let mut v = Vec::with_capacity(w * w);
            for n1 in 0..=n_max {
                for n2 in 0..=n_max {
                    v.push(ev.eval(Color::new(n1, n2))?);
                }
            }
            Entries::Modular(v)
        }
    };
    Ok(SequenceTable { knot: k, n_max, mode: mode.clone(), entries })
}

/// Directory-backed cache of tables, keyed by `(b, mode)`.
#[derive(Clone, Debug)]
pub struct TableCache {
    dir: PathBuf,
}

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "QHOLO_CACHE_DIR";

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, k: TorusKnot, mode: &TableMode) -> PathBuf {
        let name = match mode {
            TableMode::Symbolic => format!("jones_b{}_symbolic.txt", k.b),
            TableMode::Modular { v0, p } => format!("jones_b{}_v{}_p{}.txt", k.b, v0, p),
        };
        self.dir.join(name)
    }

    /// A table covering at least `[0, n_max]²`, from disk when possible.
    /// The returned table is exactly `[0, n_max]²`.
    pub fn table(&self, k: TorusKnot, n_max: u32, mode: &TableMode) -> Result<SequenceTable, JonesError> {
        let path = self.path(k, mode);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(t) = SequenceTable::from_cache_text(&text) {
                if t.n_max >= n_max && &t.mode == mode && t.knot == k {
                    return Ok(t.restrict(n_max));
                }
            }
        }
        let t = jones_table(k, n_max, mode)?;
        std::fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            f.write_all(t.to_cache_text().as_bytes())?;
        }
        std::fs::rename(&tmp, &path)?;
        Ok(t)
    }
}

impl SequenceTable {
    /// Sub-table on `[0, n]²`.
    pub fn restrict(&self, n: u32) -> Self {
        assert!(n <= self.n_max);
        let w = n as usize + 1;
        let ow = self.n_max as usize + 1;
        let entries = match &self.entries {
            Entries::Symbolic(v) => Entries::Symbolic((0..w * w).map(|i| v[(i / w) * ow + i % w].clone()).collect()),
            Entries::Modular(v) => Entries::Modular((0..w * w).map(|i| v[(i / w) * ow + i % w]).collect()),
        };
        Self { knot: self.knot, n_max: n, mode: self.mode.clone(), entries }
    }
}

/// Reads records `b n1 n2 : value` from any reader (for tooling).
pub fn read_records(r: impl BufRead) -> Result<Vec<(u32, u32, u32, String)>, JonesError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = line.split_once(':').ok_or_else(|| JonesError::Cache("missing ':'".into()))?;
        let f: Vec<u32> = lhs.split_whitespace().filter_map(|x| x.parse().ok()).collect();
        if f.len() != 3 {
            return Err(JonesError::Cache("expected three indices".into()));
        }
        out.push((f[0], f[1], f[2], rhs.trim().to_string()));
    }
    Ok(out)
}

/// Value of an integral Laurent polynomial at `q = 1`.
pub fn value_at_q_one(x: &QLaurent) -> BigInt {
    x.at_one().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_integers() {
        assert!(quantum_integer(0).is_zero());
        assert_eq!(quantum_integer(2), QLaurent::v_pow(3).add(&QLaurent::v_pow(-3)));
        assert_eq!(quantum_integer(3).to_string(), "q + 1 + q^-1");
        assert_eq!(quantum_integer(-4), quantum_integer(4).neg());
    }

    #[test]
    fn dims_and_twists() {
        assert!(quantum_dim(Color::new(0, 0)).is_one());
        assert_eq!(quantum_dim(Color::new(1, 0)).to_string(), "q + 1 + q^-1");
        assert_eq!(quantum_dim(Color::new(1, 1)).to_string(), "q^2 + 2*q + 2 + 2*q^-1 + q^-2");
        assert!(twist_pow(Color::new(0, 0), 1, 1).unwrap().is_one());
        assert_eq!(twist_pow(Color::new(1, 0), 1, 1).unwrap(), QLaurent::v_pow(8));
        assert_eq!(twist_pow(Color::new(1, 1), 3, 2).unwrap(), QLaurent::v_pow(27));
        assert!(twist_pow(Color::new(1, 0), 1, 5).is_err());
    }

    #[test]
    fn small_values() {
        let t = TorusKnot::trefoil();
        assert!(torus_jones(t, Color::new(0, 0)).unwrap().is_one());
        assert!(torus_jones(TorusKnot::new(1).unwrap(), Color::new(2, 3)).unwrap().is_one());
        assert_eq!(torus_jones(t, Color::new(1, 0)).unwrap(), torus_jones(t, Color::new(0, 1)).unwrap());
        assert!(TorusKnot::new(4).is_err());
    }

    #[test]
    fn modular_matches_symbolic_including_singular_d() {
        let t = TorusKnot::trefoil();
        let fp = PrimeField::default_field();
        // (30, 0): [31] vanishes at q0 = 64 since 64 has order 31
        for &(n1, n2) in &[(2u32, 2u32), (3, 1), (30, 0), (0, 30), (29, 0)] {
            let s = torus_jones(t, Color::new(n1, n2)).unwrap();
            let m = torus_jones_mod(t, Color::new(n1, n2), 2, &fp).unwrap();
            assert_eq!(s.eval_mod(2, &fp).unwrap(), m, "at ({n1}, {n2})");
        }
    }

    #[test]
    fn cache_text_round_trip() {
        let t = TorusKnot::trefoil();
        for mode in [TableMode::Symbolic, TableMode::Modular { v0: 2, p: 2147483647 }] {
            let tab = jones_table(t, 3, &mode).unwrap();
            let back = SequenceTable::from_cache_text(&tab.to_cache_text()).unwrap();
            assert_eq!(back, tab);
        }
    }
}
