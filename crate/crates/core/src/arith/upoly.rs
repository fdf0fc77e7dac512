//! Dense univariate polynomials over a [`PrimeField`], stored low degree first.
//!
//! These are free functions on `Vec<u64>` rather than a wrapper type; every
//! result is trimmed (no trailing zero coefficients, the zero polynomial is
//! the empty vector).

use super::modp::PrimeField;

const KARATSUBA_CUTOFF: usize = 40;

pub fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub fn degree(a: &[u64]) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

pub fn add(fp: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, &s) in out.iter_mut().zip(short) {
        *o = fp.add(*o, s);
    }
    trim(&mut out);
    out
}

pub fn sub(fp: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out.push(fp.sub(x, y));
    }
    trim(&mut out);
    out
}

pub fn scale(fp: &PrimeField, a: &[u64], c: u64) -> Vec<u64> {
    if c == 0 {
        return Vec::new();
    }
    a.iter().map(|&x| fp.mul(x, c)).collect()
}

fn schoolbook(fp: &PrimeField, a: &[u64], b: &[u64], out: &mut [u64]) {
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o = fp.mul_add(*o, x, y);
        }
    }
}

fn karatsuba(fp: &PrimeField, a: &[u64], b: &[u64], out: &mut [u64]) {
    // out has length >= a.len() + b.len() - 1 and is accumulated into
    let n = a.len().min(b.len());
    if n < KARATSUBA_CUTOFF {
        schoolbook(fp, a, b, out);
        return;
    }
    if a.len() != b.len() {
        // split the longer operand into chunks of the shorter length
        let (long, short) = if a.len() > b.len() { (a, b) } else { (b, a) };
        let mut start = 0;
        while start < long.len() {
            let end = (start + short.len()).min(long.len());
            karatsuba(fp, &long[start..end], short, &mut out[start..]);
            start = end;
        }
        return;
    }
    let h = n / 2;
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);
    let mut z0 = vec![0u64; 2 * h - 1];
    karatsuba(fp, a0, b0, &mut z0);
    let mut z2 = vec![0u64; a1.len() + b1.len() - 1];
    karatsuba(fp, a1, b1, &mut z2);
    let sa: Vec<u64> = (0..a1.len())
        .map(|i| fp.add(a1[i], a0.get(i).copied().unwrap_or(0)))
        .collect();
    let sb: Vec<u64> = (0..b1.len())
        .map(|i| fp.add(b1[i], b0.get(i).copied().unwrap_or(0)))
        .collect();
    let mut z1 = vec![0u64; sa.len() + sb.len() - 1];
    karatsuba(fp, &sa, &sb, &mut z1);
    for (i, &z) in z0.iter().enumerate() {
        z1[i] = fp.sub(z1[i], z);
        out[i] = fp.add(out[i], z);
    }
    for (i, &z) in z2.iter().enumerate() {
        z1[i] = fp.sub(z1[i], z);
        out[i + 2 * h] = fp.add(out[i + 2 * h], z);
    }
    for (i, &z) in z1.iter().enumerate() {
        out[i + h] = fp.add(out[i + h], z);
    }
}

pub fn mul(fp: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    karatsuba(fp, a, b, &mut out);
    trim(&mut out);
    out
}

/// Division with remainder; panics on division by zero.
pub fn divrem(fp: &PrimeField, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    if a.len() < b.len() {
        return (Vec::new(), a.to_vec());
    }
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lc_inv = fp.inv(b[db]).unwrap();
    let mut q = vec![0u64; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = fp.mul(r[k + db], lc_inv);
        q[k] = c;
        if c != 0 {
            let nc = fp.neg(c);
            for (j, &bj) in b.iter().enumerate() {
                r[k + j] = fp.mul_add(r[k + j], nc, bj);
            }
        }
    }
    r.truncate(db);
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

/// Exact quotient, or `None` if `b` does not divide `a`.
pub fn div_exact(fp: &PrimeField, a: &[u64], b: &[u64]) -> Option<Vec<u64>> {
    let (q, r) = divrem(fp, a, b);
    if r.is_empty() {
        Some(q)
    } else {
        None
    }
}

pub fn make_monic(fp: &PrimeField, a: &[u64]) -> Vec<u64> {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => scale(fp, a, fp.inv(lc).unwrap()),
    }
}

/// Monic greatest common divisor (zero if both inputs are zero).
pub fn gcd(fp: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = divrem(fp, &x, &y);
        x = y;
        y = r;
    }
    make_monic(fp, &x)
}

pub fn eval(fp: &PrimeField, a: &[u64], x: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| fp.mul_add(c, acc, x))
}

/// `a(c x)`.
pub fn scale_var(fp: &PrimeField, a: &[u64], c: u64) -> Vec<u64> {
    let mut pw = 1;
    let mut out = Vec::with_capacity(a.len());
    for &x in a {
        out.push(fp.mul(x, pw));
        pw = fp.mul(pw, c);
    }
    trim(&mut out);
    out
}

/// Incremental Newton interpolation of a scalar function of one variable.
#[derive(Clone, Debug)]
pub struct Newton {
    points: Vec<u64>,
    /// Interpolating polynomial in monomial basis.
    poly: Vec<u64>,
    /// `prod (x - x_i)` over the points seen so far.
    basis: Vec<u64>,
}

impl Default for Newton {
    fn default() -> Self {
        Self::new()
    }
}

impl Newton {
    pub fn new() -> Self {
        Self { points: Vec::new(), poly: Vec::new(), basis: vec![1] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn poly(&self) -> &[u64] {
        &self.poly
    }

    /// The product `prod (x - x_i)` (the modulus for rational reconstruction).
    pub fn modulus(&self) -> &[u64] {
        &self.basis
    }

    /// Add a sample; returns `true` if the current interpolant already
    /// predicted the value.
    pub fn push(&mut self, fp: &PrimeField, x: u64, y: u64) -> bool {
        let pred = eval(fp, &self.poly, x);
        let agreed = pred == y;
        if !agreed {
            let b = eval(fp, &self.basis, x);
            let c = fp.mul(fp.sub(y, pred), fp.inv(b).expect("interpolation points must be distinct"));
            let corr = scale(fp, &self.basis, c);
            self.poly = add(fp, &self.poly, &corr);
        }
        self.basis = mul(fp, &self.basis, &[fp.neg(x), 1]);
        self.points.push(x);
        agreed
    }
}

/// Rational reconstruction: find `n/d` with `n = d u mod m`, `deg n <= num_deg`,
/// `deg d <= deg m - num_deg - 1`. Returns monic-denominator output.
pub fn rational_reconstruct(
    fp: &PrimeField,
    u: &[u64],
    m: &[u64],
    num_deg: usize,
) -> Option<(Vec<u64>, Vec<u64>)> {
    let mut r0 = m.to_vec();
    let mut r1 = u.to_vec();
    trim(&mut r1);
    let (mut t0, mut t1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while degree(&r1).map_or(false, |d| d > num_deg) {
        let (q, r2) = divrem(fp, &r0, &r1);
        let t2 = sub(fp, &t0, &mul(fp, &q, &t1));
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_empty() {
        return None;
    }
    let dm = m.len() - 1;
    if t1.len() - 1 + num_deg >= dm {
        return None;
    }
    let g = gcd(fp, &r1, &t1);
    if g.len() > 1 {
        return None;
    }
    let lc_inv = fp.inv(*t1.last().unwrap()).unwrap();
    Some((scale(fp, &r1, lc_inv), scale(fp, &t1, lc_inv)))
}

/// Maximal-quotient rational reconstruction: among all `(r_k, t_k)` in the
/// extended Euclidean sequence of `(m, u)`, pick the one preceding the
/// largest quotient. The degree of that quotient minus one counts the
/// samples the answer was not fitted to; below `slack` the result is
/// rejected as underdetermined.
pub fn rational_reconstruct_mq(fp: &PrimeField, u: &[u64], m: &[u64], slack: usize) -> Option<(Vec<u64>, Vec<u64>)> {
    let mut r0 = m.to_vec();
    let mut r1 = u.to_vec();
    trim(&mut r1);
    if r1.is_empty() {
        return Some((Vec::new(), vec![1]));
    }
    let (mut t0, mut t1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    let mut best: Option<(usize, Vec<u64>, Vec<u64>)> = None;
    let mut second = 0;
    while !r1.is_empty() {
        let (q, r2) = divrem(fp, &r0, &r1);
        let dq = q.len().saturating_sub(1);
        if dq > best.as_ref().map_or(0, |b| b.0) {
            second = second.max(best.as_ref().map_or(0, |b| b.0));
            best = Some((dq, r1.clone(), t1.clone()));
        } else {
            second = second.max(dq);
        }
        let t2 = sub(fp, &t0, &mul(fp, &q, &t1));
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    let (dq, r, t) = best?;
    if dq < slack + 1 || dq <= second || t.is_empty() {
        return None;
    }
    if gcd(fp, &r, &t).len() > 1 {
        return None;
    }
    let lc_inv = fp.inv(*t.last().unwrap()).unwrap();
    Some((scale(fp, &r, lc_inv), scale(fp, &t, lc_inv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rand_poly(rng: &mut impl Rng, fp: &PrimeField, n: usize) -> Vec<u64> {
        let mut v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..fp.p())).collect();
        trim(&mut v);
        v
    }

    #[test]
    fn karatsuba_matches_schoolbook() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for &(n, m) in &[(100usize, 100usize), (150, 61), (41, 300), (5, 7)] {
            let a = rand_poly(&mut rng, &fp, n);
            let b = rand_poly(&mut rng, &fp, m);
            let mut s = vec![0; a.len() + b.len() - 1];
            schoolbook(&fp, &a, &b, &mut s);
            trim(&mut s);
            assert_eq!(mul(&fp, &a, &b), s);
        }
    }

    #[test]
    fn gcd_and_division() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let g = make_monic(&fp, &rand_poly(&mut rng, &fp, 6));
        let a = mul(&fp, &g, &rand_poly(&mut rng, &fp, 9));
        let b = mul(&fp, &g, &rand_poly(&mut rng, &fp, 4));
        assert_eq!(gcd(&fp, &a, &b), g);
        assert_eq!(div_exact(&fp, &a, &g).map(|q| mul(&fp, &q, &g)), Some(a.clone()));
    }

    #[test]
    fn newton_and_rational_reconstruction() {
        let fp = PrimeField::default_field();
        let num = vec![3, 0, 5, 1];
        let den = vec![7, 2, 1];
        let mut nw = Newton::new();
        for x in 1..=12u64 {
            let y = fp.mul(eval(&fp, &num, x), fp.inv(eval(&fp, &den, x)).unwrap());
            nw.push(&fp, x, y);
        }
        let (n, d) = rational_reconstruct(&fp, nw.poly(), nw.modulus(), 3).unwrap();
        assert_eq!(d, den);
        assert_eq!(n, num);
    }

    #[test]
    fn maximal_quotient_reconstruction_finds_degrees() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for &(dn, dd) in &[(0usize, 0usize), (5, 0), (0, 4), (7, 9), (20, 13)] {
            let num = rand_poly(&mut rng, &fp, dn + 1);
            let den = make_monic(&fp, &rand_poly(&mut rng, &fp, dd + 1));
            let mut nw = Newton::new();
            let npts = dn + dd + 6;
            for x in 1..=npts as u64 {
                nw.push(&fp, x, fp.mul(eval(&fp, &num, x), fp.inv(eval(&fp, &den, x)).unwrap()));
            }
            let (n, d) = rational_reconstruct_mq(&fp, nw.poly(), nw.modulus(), 3).unwrap();
            assert_eq!((n, d), (num.clone(), den.clone()));
            // too few samples: rejected
            let mut nw = Newton::new();
            for x in 1..=(dn + dd + 2) as u64 {
                nw.push(&fp, x, fp.mul(eval(&fp, &num, x), fp.inv(eval(&fp, &den, x)).unwrap()));
            }
            if let Some((n, d)) = rational_reconstruct_mq(&fp, nw.poly(), nw.modulus(), 3) {
                assert_eq!((n, d), (num, den));
            }
        }
    }
}
