//! Coefficients sampled on a geometric grid.
//!
//! An element of `F_p(M1, M2)` (with `q = q0`) is represented by its values
//! at the points `(alpha q0^i, beta q0^j)`, `0 <= i < w1`, `0 <= j < w2`.
//! Field operations act pointwise, and the shift `M_i -> q0^k M_i` is an
//! index offset, so the grid is closed under everything an operator
//! computation needs except that each shift gives up `k` rows or columns
//! at the far edge. Running a Groebner computation over this field
//! evaluates it at all grid points at once, without expression swell.
//!
//! An element counts as zero only if it vanishes at every point; inversion
//! fails if it vanishes at some but not all points (an unlucky grid).

use std::fmt;
use std::sync::Arc;

use super::field::CoeffField;
use crate::arith::modp::PrimeField;
use crate::arith::mpoly::MPolyQMM;
use crate::arith::ratfunc::RatFuncQMM;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeField {
    pub fp: PrimeField,
    pub q0: u64,
    pub alpha: u64,
    pub beta: u64,
    pub w1: usize,
    pub w2: usize,
}

/// A constant, or values on a `w1 x w2` window anchored at the origin
/// (index `i * w2 + j`).
#[derive(Clone)]
pub enum LatticeElem {
    Const(u64),
    Grid { w1: usize, w2: usize, vals: Arc<Vec<u32>> },
}

impl fmt::Debug for LatticeElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) => write!(f, "Const({c})"),
            Self::Grid { w1, w2, vals } => write!(f, "Grid({w1}x{w2}, first {:?})", vals.first()),
        }
    }
}

impl LatticeElem {
    pub fn window(&self) -> Option<(usize, usize)> {
        match self {
            Self::Const(_) => None,
            Self::Grid { w1, w2, .. } => Some((*w1, *w2)),
        }
    }

    pub fn value(&self, i: usize, j: usize) -> u64 {
        match self {
            Self::Const(c) => *c,
            Self::Grid { w2, vals, .. } => vals[i * w2 + j] as u64,
        }
    }
}

impl PartialEq for LatticeElem {
    /// Equality on the common window.
    fn eq(&self, o: &Self) -> bool {
        match (self, o) {
            (Self::Const(a), Self::Const(b)) => a == b,
            _ => {
                let (w1, w2) = common(self, o);
                (0..w1).all(|i| (0..w2).all(|j| self.value(i, j) == o.value(i, j)))
            }
        }
    }
}

fn common(a: &LatticeElem, b: &LatticeElem) -> (usize, usize) {
    match (a.window(), b.window()) {
        (Some((a1, a2)), Some((b1, b2))) => (a1.min(b1), a2.min(b2)),
        (Some(w), None) | (None, Some(w)) => w,
        (None, None) => (0, 0),
    }
}

impl LatticeField {
    pub fn new(fp: PrimeField, q0: u64, alpha: u64, beta: u64, w1: usize, w2: usize) -> Self {
        Self { fp, q0, alpha, beta, w1, w2 }
    }

    /// Grid coordinates `alpha q0^i`, `i < w1`.
    pub fn xs(&self) -> Vec<u64> {
        geometric(&self.fp, self.alpha, self.q0, self.w1)
    }

    pub fn ys(&self) -> Vec<u64> {
        geometric(&self.fp, self.beta, self.q0, self.w2)
    }

    fn grid(&self, w1: usize, w2: usize, vals: Vec<u32>) -> LatticeElem {
        debug_assert_eq!(vals.len(), w1 * w2);
        LatticeElem::Grid { w1, w2, vals: Arc::new(vals) }
    }

    fn zip(&self, a: &LatticeElem, b: &LatticeElem, op: impl Fn(u64, u64) -> u64) -> LatticeElem {
        match (a, b) {
            (LatticeElem::Const(x), LatticeElem::Const(y)) => LatticeElem::Const(op(*x, *y)),
            _ => {
                let (w1, w2) = common(a, b);
                let mut out = Vec::with_capacity(w1 * w2);
                for i in 0..w1 {
                    for j in 0..w2 {
                        out.push(op(a.value(i, j), b.value(i, j)) as u32);
                    }
                }
                self.grid(w1, w2, out)
            }
        }
    }

    fn map(&self, a: &LatticeElem, op: impl Fn(u64) -> u64) -> LatticeElem {
        match a {
            LatticeElem::Const(x) => LatticeElem::Const(op(*x)),
            LatticeElem::Grid { w1, w2, vals } => self.grid(*w1, *w2, vals.iter().map(|&v| op(v as u64) as u32).collect()),
        }
    }

    /// Values of a polynomial at the grid points; `None` if a coefficient
    /// denominator vanishes modulo `p`.
    pub fn eval_poly(&self, f: &MPolyQMM) -> Option<Vec<u32>> {
        let fp = &self.fp;
        let (w1, w2) = (self.w1, self.w2);
        let xs = self.xs();
        let ys = self.ys();
        let max_a = f.degree_m1() as usize;
        let max_b = f.degree_m2() as usize;
        let ypow = power_table(fp, &ys, max_b);
        // g[a][j] = sum over terms with M1^a of c q0^e y_j^b
        let mut g = vec![vec![0u64; w2]; max_a + 1];
        for ((e, a, b), c) in f.terms() {
            let c = fp.mul(fp.from_rational(c).ok()?, fp.pow(self.q0, e as u64));
            let row = &mut g[a as usize];
            for (j, gj) in row.iter_mut().enumerate() {
                *gj = fp.mul_add(*gj, c, ypow[b as usize][j]);
            }
        }
        let mut out = vec![0u32; w1 * w2];
        for i in 0..w1 {
            // Horner in x_i over a
            let x = xs[i];
            let cell = &mut out[i * w2..(i + 1) * w2];
            for j in 0..w2 {
                let mut acc = 0u64;
                for a in (0..=max_a).rev() {
                    acc = fp.mul_add(g[a][j], acc, x);
                }
                cell[j] = acc as u32;
            }
        }
        Some(out)
    }

    /// The image of an exact element; `None` if it is undefined at some
    /// grid point.
    pub fn image(&self, f: &RatFuncQMM) -> Option<LatticeElem> {
        if let Some(c) = f.constant_value() {
            return Some(LatticeElem::Const(self.fp.from_rational(&c).ok()?));
        }
        let num = self.eval_poly(f.num())?;
        let den = self.eval_poly(f.den())?;
        let mut out = Vec::with_capacity(num.len());
        for (n, d) in num.iter().zip(&den) {
            let inv = self.fp.inv(*d as u64)?;
            out.push(self.fp.mul(*n as u64, inv) as u32);
        }
        Some(self.grid(self.w1, self.w2, out))
    }

    /// Values on the leading `w1 x w2` corner as rows in `M1` for each `M2`
    /// (`out[j][i]`), the layout expected by the bivariate reconstruction.
    pub fn to_rows(&self, a: &LatticeElem, w1: usize, w2: usize) -> Option<Vec<Vec<u64>>> {
        if let Some((a1, a2)) = a.window() {
            if a1 < w1 || a2 < w2 {
                return None;
            }
        }
        Some((0..w2).map(|j| (0..w1).map(|i| a.value(i, j)).collect()).collect())
    }
}

fn geometric(fp: &PrimeField, start: u64, ratio: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut x = start;
    for _ in 0..n {
        out.push(x);
        x = fp.mul(x, ratio);
    }
    out
}

fn power_table(fp: &PrimeField, xs: &[u64], max: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![1u64; xs.len()]];
    for k in 1..=max {
        let prev = &t[k - 1];
        let next = prev.iter().zip(xs).map(|(&p, &x)| fp.mul(p, x)).collect();
        t.push(next);
    }
    t
}

impl CoeffField for LatticeField {
    type Elem = LatticeElem;

    fn zero(&self) -> LatticeElem {
        LatticeElem::Const(0)
    }
    fn one(&self) -> LatticeElem {
        LatticeElem::Const(1)
    }
    fn from_i64(&self, n: i64) -> LatticeElem {
        LatticeElem::Const(self.fp.from_i64(n))
    }
    fn is_zero(&self, a: &LatticeElem) -> bool {
        match a {
            LatticeElem::Const(c) => *c == 0,
            LatticeElem::Grid { vals, .. } => vals.iter().all(|&v| v == 0),
        }
    }
    fn add(&self, a: &LatticeElem, b: &LatticeElem) -> LatticeElem {
        self.zip(a, b, |x, y| self.fp.add(x, y))
    }
    fn sub(&self, a: &LatticeElem, b: &LatticeElem) -> LatticeElem {
        self.zip(a, b, |x, y| self.fp.sub(x, y))
    }
    fn mul(&self, a: &LatticeElem, b: &LatticeElem) -> LatticeElem {
        match (a, b) {
            (LatticeElem::Const(1), x) | (x, LatticeElem::Const(1)) => x.clone(),
            _ => self.zip(a, b, |x, y| self.fp.mul(x, y)),
        }
    }
    fn neg(&self, a: &LatticeElem) -> LatticeElem {
        self.map(a, |x| self.fp.neg(x))
    }
    fn inv(&self, a: &LatticeElem) -> Option<LatticeElem> {
        match a {
            LatticeElem::Const(c) => self.fp.inv(*c).map(LatticeElem::Const),
            LatticeElem::Grid { w1, w2, vals } => {
                // batch inversion
                let n = vals.len();
                let mut prefix = Vec::with_capacity(n);
                let mut acc = 1u64;
                for &v in vals.iter() {
                    if v == 0 {
                        return None;
                    }
                    prefix.push(acc);
                    acc = self.fp.mul(acc, v as u64);
                }
                let mut inv = self.fp.inv(acc)?;
                let mut out = vec![0u32; n];
                for k in (0..n).rev() {
                    out[k] = self.fp.mul(inv, prefix[k]) as u32;
                    inv = self.fp.mul(inv, vals[k] as u64);
                }
                Some(self.grid(*w1, *w2, out))
            }
        }
    }
    fn shift(&self, a: &LatticeElem, k1: u32, k2: u32) -> LatticeElem {
        let (k1, k2) = (k1 as usize, k2 as usize);
        match a {
            LatticeElem::Const(_) => a.clone(),
            _ if k1 == 0 && k2 == 0 => a.clone(),
            LatticeElem::Grid { w1, w2, vals } => {
                let n1 = w1.saturating_sub(k1);
                let n2 = w2.saturating_sub(k2);
                let mut out = Vec::with_capacity(n1 * n2);
                for i in 0..n1 {
                    let row = &vals[(i + k1) * w2..(i + k1 + 1) * w2];
                    out.extend_from_slice(&row[k2..k2 + n2]);
                }
                self.grid(n1, n2, out)
            }
        }
    }
    /// Only meaningful on a square grid with `alpha = beta`.
    fn swap(&self, a: &LatticeElem) -> LatticeElem {
        assert!(self.alpha == self.beta, "swap needs a grid symmetric under M1 <-> M2");
        match a {
            LatticeElem::Const(_) => a.clone(),
            LatticeElem::Grid { w1, w2, vals } => {
                let mut out = Vec::with_capacity(vals.len());
                for j in 0..*w2 {
                    for i in 0..*w1 {
                        out.push(vals[i * w2 + j]);
                    }
                }
                self.grid(*w2, *w1, out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_ratfunc;

    fn field() -> LatticeField {
        LatticeField::new(PrimeField::default_field(), 729, 17, 23, 6, 5)
    }

    #[test]
    fn image_matches_pointwise_evaluation() {
        let lf = field();
        let f = parse_ratfunc("(q^2*M1^3 - M2 + 5)/(q*M1*M2 - 7)").unwrap();
        let img = lf.image(&f).unwrap();
        let (xs, ys) = (lf.xs(), lf.ys());
        for i in 0..6 {
            for j in 0..5 {
                assert_eq!(img.value(i, j), f.eval_mod(729, xs[i], ys[j], &lf.fp).unwrap());
            }
        }
    }

    #[test]
    fn shift_is_an_index_offset() {
        let lf = field();
        let f = parse_ratfunc("M1^2 + 3*q*M2").unwrap();
        let shifted = lf.image(&f.shift_m(2, 1)).unwrap();
        let img = lf.shift(&lf.image(&f).unwrap(), 2, 1);
        assert_eq!(img.window(), Some((4, 4)));
        assert_eq!(img, shifted);
    }

    #[test]
    fn inverse_and_zero() {
        let lf = field();
        let f = lf.image(&parse_ratfunc("M1 - 2*M2 + q").unwrap()).unwrap();
        let g = lf.inv(&f).unwrap();
        assert!(lf.is_one(&lf.mul(&f, &g)));
        assert!(lf.is_zero(&lf.sub(&f, &f)));
    }
}
