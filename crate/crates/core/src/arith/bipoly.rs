//! Dense bivariate polynomials in `(M1, M2)` over a prime field, and the
//! reduced rational functions built from them.
//!
//! Row `i` of a [`BiPoly`] holds the coefficient of `M1^i` as a univariate
//! polynomial in `M2`.

use super::modp::PrimeField;
use super::upoly;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BiPoly {
    rows: Vec<Vec<u64>>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn constant(c: u64) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            Self { rows: vec![vec![c]] }
        }
    }

    pub fn monomial(c: u64, i: usize, j: usize) -> Self {
        if c == 0 {
            return Self::zero();
        }
        let mut rows = vec![Vec::new(); i + 1];
        let mut r = vec![0; j + 1];
        r[j] = c;
        rows[i] = r;
        Self { rows }
    }

    /// Build from `(i, j, c)` triples (duplicates are summed).
    pub fn from_terms(fp: &PrimeField, terms: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for (i, j, c) in terms {
            if rows.len() <= i {
                rows.resize(i + 1, Vec::new());
            }
            let row = &mut rows[i];
            if row.len() <= j {
                row.resize(j + 1, 0);
            }
            row[j] = fp.add(row[j], c);
        }
        Self::from_rows(rows)
    }

    pub fn from_rows(mut rows: Vec<Vec<u64>>) -> Self {
        for r in rows.iter_mut() {
            upoly::trim(r);
        }
        while rows.last().map_or(false, |r| r.is_empty()) {
            rows.pop();
        }
        Self { rows }
    }

    /// Embed a univariate polynomial in `M2`.
    pub fn from_m2_poly(c: Vec<u64>) -> Self {
        Self::from_rows(vec![c])
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.rows.len() <= 1 && self.rows.first().map_or(true, |r| r.len() <= 1)
    }

    pub fn is_one(&self) -> bool {
        self.rows.len() == 1 && self.rows[0] == [1]
    }

    pub fn deg_m1(&self) -> Option<usize> {
        upoly_degree_rows(&self.rows)
    }

    pub fn deg_m2(&self) -> Option<usize> {
        self.rows.iter().filter_map(|r| upoly::degree(r)).max()
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms().map(|(i, j, _)| i + j).max()
    }

    pub fn coeff(&self, i: usize, j: usize) -> u64 {
        self.rows.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.rows.iter().map(|r| r.iter().filter(|&&c| c != 0).count()).sum()
    }

    /// Nonzero terms `(M1 exponent, M2 exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| {
            r.iter().enumerate().filter(|(_, &c)| c != 0).map(move |(j, &c)| (i, j, c))
        })
    }

    /// Leading coefficient under lex order with `M1 > M2`.
    pub fn lead_coeff(&self) -> u64 {
        self.rows.last().and_then(|r| r.last()).copied().unwrap_or(0)
    }

    pub fn lead_exponent(&self) -> Option<(usize, usize)> {
        self.rows.last().map(|r| (self.rows.len() - 1, r.len() - 1))
    }

    pub fn make_monic(&self, fp: &PrimeField) -> Self {
        let lc = self.lead_coeff();
        if lc == 0 || lc == 1 {
            return self.clone();
        }
        self.scale(fp, fp.inv(lc).unwrap())
    }

    pub fn neg(&self, fp: &PrimeField) -> Self {
        Self { rows: self.rows.iter().map(|r| r.iter().map(|&c| fp.neg(c)).collect()).collect() }
    }

    pub fn scale(&self, fp: &PrimeField, c: u64) -> Self {
        if c == 0 {
            return Self::zero();
        }
        Self { rows: self.rows.iter().map(|r| upoly::scale(fp, r, c)).collect() }
    }

    pub fn add(&self, fp: &PrimeField, other: &Self) -> Self {
        let n = self.rows.len().max(other.rows.len());
        let rows = (0..n)
            .map(|i| match (self.rows.get(i), other.rows.get(i)) {
                (Some(a), Some(b)) => upoly::add(fp, a, b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn sub(&self, fp: &PrimeField, other: &Self) -> Self {
        let n = self.rows.len().max(other.rows.len());
        let empty = Vec::new();
        let rows = (0..n)
            .map(|i| upoly::sub(fp, self.rows.get(i).unwrap_or(&empty), other.rows.get(i).unwrap_or(&empty)))
            .collect();
        Self::from_rows(rows)
    }

    pub fn mul(&self, fp: &PrimeField, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.is_constant() {
            return other.scale(fp, self.lead_coeff());
        }
        if other.is_constant() {
            return self.scale(fp, other.lead_coeff());
        }
        // Kronecker substitution M2 -> x, M1 -> x^stride
        let stride = self.deg_m2().unwrap() + other.deg_m2().unwrap() + 1;
        let flat_a = flatten(&self.rows, stride);
        let flat_b = flatten(&other.rows, stride);
        let prod = upoly::mul(fp, &flat_a, &flat_b);
        let rows = prod.chunks(stride).map(|c| c.to_vec()).collect();
        Self::from_rows(rows)
    }

    pub fn pow(&self, fp: &PrimeField, e: u32) -> Self {
        let mut r = Self::constant(1);
        for _ in 0..e {
            r = r.mul(fp, self);
        }
        r
    }

    /// Substitute `M2 = a`, giving a polynomial in `M1`.
    pub fn eval_m2(&self, fp: &PrimeField, a: u64) -> Vec<u64> {
        let mut v: Vec<u64> = self.rows.iter().map(|r| upoly::eval(fp, r, a)).collect();
        upoly::trim(&mut v);
        v
    }

    pub fn eval(&self, fp: &PrimeField, m1: u64, m2: u64) -> u64 {
        upoly::eval(fp, &self.eval_m2(fp, m2), m1)
    }

    /// `p(c1 M1, c2 M2)`.
    pub fn scale_vars(&self, fp: &PrimeField, c1: u64, c2: u64) -> Self {
        let mut pw = 1;
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let r2 = upoly::scale_var(fp, r, c2);
            rows.push(upoly::scale(fp, &r2, pw));
            pw = fp.mul(pw, c1);
        }
        Self::from_rows(rows)
    }

    /// Exchange `M1` and `M2`.
    pub fn swap_vars(&self) -> Self {
        let d2 = self.deg_m2().map_or(0, |d| d + 1);
        let mut rows = vec![vec![0u64; self.rows.len()]; d2];
        for (i, j, c) in self.terms() {
            rows[j][i] = c;
        }
        Self::from_rows(rows)
    }

    /// Monic gcd of the rows, as a polynomial in `M2`.
    pub fn content_m2(&self, fp: &PrimeField) -> Vec<u64> {
        let mut g: Vec<u64> = Vec::new();
        for r in &self.rows {
            if r.is_empty() {
                continue;
            }
            g = upoly::gcd(fp, &g, r);
            if g.len() == 1 {
                break;
            }
        }
        g
    }

    /// Divide every row by the univariate `c` (which must divide exactly).
    pub fn div_m2_poly(&self, fp: &PrimeField, c: &[u64]) -> Self {
        if c.len() == 1 {
            return self.scale(fp, fp.inv(c[0]).unwrap());
        }
        let rows = self
            .rows
            .iter()
            .map(|r| if r.is_empty() { Vec::new() } else { upoly::div_exact(fp, r, c).expect("content division must be exact") })
            .collect();
        Self::from_rows(rows)
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, fp: &PrimeField, d: &Self) -> Option<Self> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Self::zero());
        }
        if d.is_constant() {
            return Some(self.scale(fp, fp.inv(d.lead_coeff()).unwrap()));
        }
        let dd = d.rows.len() - 1;
        let ld = &d.rows[dd];
        if self.rows.len() < d.rows.len() {
            return None;
        }
        if d.deg_m2()? > self.deg_m2()? {
            return None;
        }
        let mut r = self.rows.clone();
        let mut q = vec![Vec::new(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let top = &r[k + dd];
            if top.is_empty() {
                continue;
            }
            let c = upoly::div_exact(fp, top, ld)?;
            for (j, drow) in d.rows.iter().enumerate() {
                if drow.is_empty() {
                    continue;
                }
                let t = upoly::mul(fp, &c, drow);
                r[k + j] = upoly::sub(fp, &r[k + j], &t);
            }
            q[k] = c;
        }
        if r.iter().any(|row| !row.is_empty()) {
            return None;
        }
        Some(Self::from_rows(q))
    }

    /// Greatest common divisor, monic in the lex(M1 > M2) leading term.
    pub fn gcd(&self, fp: &PrimeField, other: &Self) -> Self {
        if self.is_zero() {
            return other.make_monic(fp);
        }
        if other.is_zero() {
            return self.make_monic(fp);
        }
        if self.is_constant() || other.is_constant() {
            return Self::constant(1);
        }
        let ca = self.content_m2(fp);
        let cb = other.content_m2(fp);
        let c = upoly::gcd(fp, &ca, &cb);
        let a = self.div_m2_poly(fp, &ca);
        let b = other.div_m2_poly(fp, &cb);
        let content_only = || Self::from_m2_poly(c.clone()).make_monic(fp);
        if a.rows.len() == 1 || b.rows.len() == 1 {
            return content_only();
        }
        if let Some(q) = b.div_exact(fp, &a) {
            let _ = q;
            return a.mul(fp, &Self::from_m2_poly(c.clone())).make_monic(fp);
        }
        if let Some(q) = a.div_exact(fp, &b) {
            let _ = q;
            return b.mul(fp, &Self::from_m2_poly(c.clone())).make_monic(fp);
        }
        let la = a.rows.last().unwrap().clone();
        let lb = b.rows.last().unwrap().clone();
        let gamma = upoly::gcd(fp, &la, &lb);
        let bound = gamma.len() - 1 + a.deg_m2().unwrap().min(b.deg_m2().unwrap());

        let mut cur_deg = usize::MAX;
        let mut interp: Vec<upoly::Newton> = Vec::new();
        let mut alpha = 0u64;
        let mut tries = 0usize;
        loop {
            alpha += 1;
            tries += 1;
            assert!(tries < 1_000_000, "bivariate gcd failed to find good evaluation points");
            let al = alpha % fp.p();
            if upoly::eval(fp, &la, al) == 0 || upoly::eval(fp, &lb, al) == 0 {
                continue;
            }
            let ga = upoly::gcd(fp, &a.eval_m2(fp, al), &b.eval_m2(fp, al));
            let dg = ga.len() - 1;
            if dg == 0 {
                return content_only();
            }
            if dg > cur_deg {
                continue;
            }
            if dg < cur_deg {
                cur_deg = dg;
                interp = vec![upoly::Newton::new(); dg + 1];
            }
            let gv = upoly::eval(fp, &gamma, al);
            let mut stable = true;
            for (nw, &coef) in interp.iter_mut().zip(&ga) {
                stable &= nw.push(fp, al, fp.mul(coef, gv));
            }
            let npts = interp[0].len();
            if npts > bound || (stable && npts > 2) {
                let cand = Self::from_rows_transposed(&interp);
                let cont = cand.content_m2(fp);
                let h = cand.div_m2_poly(fp, &cont);
                if a.div_exact(fp, &h).is_some() && b.div_exact(fp, &h).is_some() {
                    return h.mul(fp, &Self::from_m2_poly(c)).make_monic(fp);
                }
                if npts > bound {
                    // all points so far were unlucky with a common degree
                    cur_deg = usize::MAX;
                }
            }
        }
    }

    fn from_rows_transposed(interp: &[upoly::Newton]) -> Self {
        Self::from_rows(interp.iter().map(|nw| nw.poly().to_vec()).collect())
    }
}

fn upoly_degree_rows(rows: &[Vec<u64>]) -> Option<usize> {
    if rows.is_empty() {
        None
    } else {
        Some(rows.len() - 1)
    }
}

fn flatten(rows: &[Vec<u64>], stride: usize) -> Vec<u64> {
    let mut flat = vec![0u64; rows.len() * stride];
    for (i, r) in rows.iter().enumerate() {
        flat[i * stride..i * stride + r.len()].copy_from_slice(r);
    }
    upoly::trim(&mut flat);
    flat
}

/// A reduced fraction of bivariate polynomials over `F_p`; the denominator
/// is monic under lex(M1 > M2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFuncMod {
    pub num: BiPoly,
    pub den: BiPoly,
}

impl RatFuncMod {
    pub fn zero() -> Self {
        Self { num: BiPoly::zero(), den: BiPoly::constant(1) }
    }

    pub fn one() -> Self {
        Self::from_poly(BiPoly::constant(1))
    }

    pub fn from_poly(p: BiPoly) -> Self {
        Self { num: p, den: BiPoly::constant(1) }
    }

    pub fn new(fp: &PrimeField, num: BiPoly, den: BiPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(fp, &den);
        let (n, d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(fp, &g).unwrap(), den.div_exact(fp, &g).unwrap())
        };
        Self::normalize(fp, n, d)
    }

    fn normalize(fp: &PrimeField, num: BiPoly, den: BiPoly) -> Self {
        let lc = den.lead_coeff();
        if lc == 1 {
            Self { num, den }
        } else {
            let inv = fp.inv(lc).unwrap();
            Self { num: num.scale(fp, inv), den: den.scale(fp, inv) }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn add(&self, fp: &PrimeField, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return Self::from_poly(self.num.add(fp, &o.num));
        }
        if self.den == o.den {
            let n = self.num.add(fp, &o.num);
            if n.is_zero() {
                return Self::zero();
            }
            let g = n.gcd(fp, &self.den);
            if g.is_one() {
                return Self { num: n, den: self.den.clone() };
            }
            return Self::normalize(fp, n.div_exact(fp, &g).unwrap(), self.den.div_exact(fp, &g).unwrap());
        }
        let g = self.den.gcd(fp, &o.den);
        let (sd, od) = if g.is_one() {
            (self.den.clone(), o.den.clone())
        } else {
            (self.den.div_exact(fp, &g).unwrap(), o.den.div_exact(fp, &g).unwrap())
        };
        let n = self.num.mul(fp, &od).add(fp, &o.num.mul(fp, &sd));
        if n.is_zero() {
            return Self::zero();
        }
        let d = sd.mul(fp, &o.den);
        if g.is_one() {
            return Self::normalize(fp, n, d);
        }
        let h = n.gcd(fp, &g);
        if h.is_one() {
            Self::normalize(fp, n, d)
        } else {
            Self::normalize(fp, n.div_exact(fp, &h).unwrap(), d.div_exact(fp, &h).unwrap())
        }
    }

    pub fn neg(&self, fp: &PrimeField) -> Self {
        Self { num: self.num.neg(fp), den: self.den.clone() }
    }

    pub fn sub(&self, fp: &PrimeField, o: &Self) -> Self {
        self.add(fp, &o.neg(fp))
    }

    pub fn mul(&self, fp: &PrimeField, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Self::from_poly(self.num.mul(fp, &o.num));
        }
        let g1 = self.num.gcd(fp, &o.den);
        let g2 = o.num.gcd(fp, &self.den);
        let n1 = self.num.div_exact(fp, &g1).unwrap();
        let d2 = o.den.div_exact(fp, &g1).unwrap();
        let n2 = o.num.div_exact(fp, &g2).unwrap();
        let d1 = self.den.div_exact(fp, &g2).unwrap();
        Self::normalize(fp, n1.mul(fp, &n2), d1.mul(fp, &d2))
    }

    pub fn inv(&self, fp: &PrimeField) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        Self::normalize(fp, self.den.clone(), self.num.clone())
    }

    pub fn div(&self, fp: &PrimeField, o: &Self) -> Self {
        self.mul(fp, &o.inv(fp))
    }

    pub fn scale_vars(&self, fp: &PrimeField, c1: u64, c2: u64) -> Self {
        Self::normalize(fp, self.num.scale_vars(fp, c1, c2), self.den.scale_vars(fp, c1, c2))
    }

    pub fn swap_vars(&self, fp: &PrimeField) -> Self {
        Self::normalize(fp, self.num.swap_vars(), self.den.swap_vars())
    }

    /// Value at a point, or `None` where the denominator vanishes.
    pub fn eval(&self, fp: &PrimeField, m1: u64, m2: u64) -> Option<u64> {
        let d = self.den.eval(fp, m1, m2);
        fp.inv(d).map(|di| fp.mul(self.num.eval(fp, m1, m2), di))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rand_bi(rng: &mut impl Rng, fp: &PrimeField, d1: usize, d2: usize) -> BiPoly {
        let terms: Vec<_> = (0..=d1)
            .flat_map(|i| (0..=d2).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, rng.gen_range(0..fp.p())))
            .collect();
        BiPoly::from_terms(fp, terms)
    }

    #[test]
    fn kronecker_product_matches_naive() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let a = rand_bi(&mut rng, &fp, 5, 7);
        let b = rand_bi(&mut rng, &fp, 3, 9);
        let mut naive = Vec::new();
        for (i, j, c) in a.terms() {
            for (k, l, d) in b.terms() {
                naive.push((i + k, j + l, fp.mul(c, d)));
            }
        }
        assert_eq!(a.mul(&fp, &b), BiPoly::from_terms(&fp, naive));
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let g = rand_bi(&mut rng, &fp, 3, 4).make_monic(&fp);
            let a = rand_bi(&mut rng, &fp, 4, 2);
            let b = rand_bi(&mut rng, &fp, 2, 5);
            let ga = g.mul(&fp, &a);
            let gb = g.mul(&fp, &b);
            assert_eq!(ga.gcd(&fp, &gb), g);
            assert_eq!(ga.div_exact(&fp, &g), Some(a.clone()));
        }
        // content-only common factor in M2
        let c = BiPoly::from_terms(&fp, [(0, 0, 3), (0, 1, 1)]);
        let x = BiPoly::from_terms(&fp, [(1, 0, 1), (0, 0, 2)]);
        let y = BiPoly::from_terms(&fp, [(1, 1, 1), (0, 0, 5)]);
        assert_eq!(c.mul(&fp, &x).gcd(&fp, &c.mul(&fp, &y)), c.make_monic(&fp));
    }

    #[test]
    fn rational_function_field_ops() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let a = RatFuncMod::new(&fp, rand_bi(&mut rng, &fp, 2, 2), rand_bi(&mut rng, &fp, 1, 2));
        let b = RatFuncMod::new(&fp, rand_bi(&mut rng, &fp, 1, 1), rand_bi(&mut rng, &fp, 2, 1));
        let s = a.add(&fp, &b);
        assert_eq!(s.sub(&fp, &b), a);
        let p = a.mul(&fp, &b);
        assert_eq!(p.div(&fp, &b), a);
        let (m1, m2) = (12345, 67890);
        let lhs = p.eval(&fp, m1, m2).unwrap();
        let rhs = fp.mul(a.eval(&fp, m1, m2).unwrap(), b.eval(&fp, m1, m2).unwrap());
        assert_eq!(lhs, rhs);
    }
}
