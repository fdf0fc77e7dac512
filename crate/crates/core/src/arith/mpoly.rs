//! Sparse polynomials in `(q, M1, M2)` with rational coefficients.
//!
//! Terms are kept sorted by a packed exponent key whose numeric order is
//! lex with `q > M1 > M2`; the last term is the leading one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::bipoly::BiPoly;
use super::modp::PrimeField;
use super::qlaurent::QLaurent;
use super::ArithError;

/// Exponents of `q`, `M1`, `M2`.
pub type Exp3 = (u32, u32, u32);

const BITS: u32 = 21;
const MASK: u64 = (1 << BITS) - 1;

#[inline]
pub fn pack(e: Exp3) -> u64 {
    debug_assert!(e.0 as u64 <= MASK && e.1 as u64 <= MASK && e.2 as u64 <= MASK);
    ((e.0 as u64) << (2 * BITS)) | ((e.1 as u64) << BITS) | e.2 as u64
}

#[inline]
pub fn unpack(k: u64) -> Exp3 {
    ((k >> (2 * BITS)) as u32, ((k >> BITS) & MASK) as u32, (k & MASK) as u32)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MPolyQMM {
    terms: Vec<(u64, BigRational)>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

impl MPolyQMM {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, (0, 0, 0))
    }

    pub fn monomial(c: BigRational, e: Exp3) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Self { terms: vec![(pack(e), c)] }
        }
    }

    pub fn q() -> Self {
        Self::monomial(rat(1), (1, 0, 0))
    }

    pub fn m1() -> Self {
        Self::monomial(rat(1), (0, 1, 0))
    }

    pub fn m2() -> Self {
        Self::monomial(rat(1), (0, 0, 1))
    }

    /// `q^k M1^a M2^b - 1`, the shape of most reference cofactors.
    pub fn binomial_minus_one(k: u32, a: u32, b: u32) -> Self {
        Self::from_terms([((k, a, b), rat(1)), ((0, 0, 0), rat(-1))])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exp3, BigRational)>) -> Self {
        let mut map: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *map.entry(pack(e)).or_insert_with(BigRational::zero) += c;
        }
        Self { terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn from_int_terms(terms: impl IntoIterator<Item = (Exp3, BigInt)>) -> Self {
        Self::from_terms(terms.into_iter().map(|(e, c)| (e, BigRational::from_integer(c))))
    }

    fn from_sorted(terms: Vec<(u64, BigRational)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        Self { terms }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (Exp3, &BigRational)> + ExactSizeIterator + '_ {
        self.terms.iter().map(|(k, c)| (unpack(*k), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == 0)
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(0, c)] => Some(c.clone()),
            _ => None,
        }
    }

    pub fn coeff(&self, e: Exp3) -> BigRational {
        let k = pack(e);
        self.terms.binary_search_by_key(&k, |t| t.0).map(|i| self.terms[i].1.clone()).unwrap_or_else(|_| BigRational::zero())
    }

    /// Leading term under lex(q > M1 > M2).
    pub fn lead(&self) -> Option<(Exp3, &BigRational)> {
        self.terms.last().map(|(k, c)| (unpack(*k), c))
    }

    pub fn is_integral(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_integer())
    }

    pub fn degree_q(&self) -> u32 {
        self.terms().map(|(e, _)| e.0).max().unwrap_or(0)
    }

    pub fn degree_m1(&self) -> u32 {
        self.terms().map(|(e, _)| e.1).max().unwrap_or(0)
    }

    pub fn degree_m2(&self) -> u32 {
        self.terms().map(|(e, _)| e.2).max().unwrap_or(0)
    }

    /// Total degree in `(M1, M2)`.
    pub fn total_degree_m(&self) -> u32 {
        self.terms().map(|(e, _)| e.1 + e.2).max().unwrap_or(0)
    }

    /// Componentwise minimum exponent over all terms (the monomial content).
    pub fn min_exponents(&self) -> Exp3 {
        let mut it = self.terms();
        let first = match it.next() {
            Some((e, _)) => e,
            None => return (0, 0, 0),
        };
        it.fold(first, |m, (e, _)| (m.0.min(e.0), m.1.min(e.1), m.2.min(e.2)))
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, x)| (*k, x * c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j].clone());
                j += 1;
            } else {
                let c = &a[i].1 + &b[j].1;
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Self::from_sorted(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiply by `c q^e0 M1^e1 M2^e2`.
    pub fn mul_term(&self, e: Exp3, c: &BigRational) -> Self {
        let s = pack(e);
        Self { terms: self.terms.iter().map(|(k, x)| (k + s, x * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if let (Some(a), Some(b)) = (small_ints(&self.terms), small_ints(&other.terms)) {
            let ma = a.iter().map(|t| t.1.unsigned_abs() as u128).max().unwrap();
            let mb = b.iter().map(|t| t.1.unsigned_abs() as u128).max().unwrap();
            let n = a.len().min(b.len()) as u128;
            if ma.checked_mul(mb).and_then(|x| x.checked_mul(n)).map_or(false, |x| x < (1u128 << 126)) {
                let mut acc: HashMap<u64, i128> = HashMap::with_capacity(a.len() * 2);
                for &(ka, ca) in &a {
                    for &(kb, cb) in &b {
                        *acc.entry(ka + kb).or_insert(0) += ca as i128 * cb as i128;
                    }
                }
                let mut terms: Vec<(u64, BigRational)> = acc
                    .into_iter()
                    .filter(|(_, c)| *c != 0)
                    .map(|(k, c)| (k, BigRational::from_integer(BigInt::from(c))))
                    .collect();
                terms.sort_unstable_by_key(|t| t.0);
                return Self::from_sorted(terms);
            }
        }
        let mut acc: HashMap<u64, BigRational> = HashMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                *acc.entry(ka + kb).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|t| t.0);
        Self::from_sorted(terms)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Exact quotient, or `None` if `d` does not divide `self` over `Q`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        let (dk, dc) = d.terms.last().unwrap();
        let (dk, dinv) = (*dk, dc.recip());
        let de = unpack(dk);
        let dtail = &d.terms[..d.terms.len() - 1];
        let mut rem: BTreeMap<u64, BigRational> = self.terms.iter().cloned().collect();
        let mut quot: Vec<(u64, BigRational)> = Vec::new();
        while let Some((&k, _)) = rem.iter().next_back() {
            let e = unpack(k);
            if e.0 < de.0 || e.1 < de.1 || e.2 < de.2 {
                return None;
            }
            let c = rem.remove(&k).unwrap() * &dinv;
            let s = k - dk;
            for (tk, tc) in dtail {
                let key = tk + s;
                let v = tc * &c;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() -= v;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(vac) => {
                        vac.insert(-v);
                    }
                }
            }
            quot.push((s, c));
        }
        quot.reverse();
        Some(Self::from_sorted(quot))
    }

    /// Divide by the monomial `q^e0 M1^e1 M2^e2`; every term must be divisible.
    pub fn div_monomial(&self, e: Exp3) -> Self {
        let s = pack(e);
        Self { terms: self.terms.iter().map(|(k, c)| (k - s, c.clone())).collect() }
    }

    /// Split off the rational content: `self = content * primitive` where
    /// the primitive part has coprime integer coefficients and a positive
    /// leading coefficient.
    pub fn content_split(&self) -> Result<(BigRational, MPolyQMM), ArithError> {
        if self.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for (_, c) in &self.terms {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        let mut content = BigRational::new(g, l);
        if self.terms.last().unwrap().1.is_negative() {
            content = -content;
        }
        let inv = content.recip();
        Ok((content, self.scale(&inv)))
    }

    /// Primitive part (zero maps to zero).
    pub fn primitive(&self) -> MPolyQMM {
        self.content_split().map(|x| x.1).unwrap_or_default()
    }

    /// Integer coefficients, if all coefficients are integers.
    pub fn int_terms(&self) -> Option<Vec<(Exp3, BigInt)>> {
        self.terms.iter().map(|(k, c)| if c.is_integer() { Some((unpack(*k), c.to_integer())) } else { None }).collect()
    }

    /// Apply an exponent map to every term (must stay within range).
    pub fn map_exponents(&self, f: impl Fn(Exp3) -> Exp3) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (f(e), c.clone())))
    }

    /// Exchange `M1` and `M2`.
    pub fn swap_m(&self) -> Self {
        self.map_exponents(|(a, b, c)| (a, c, b))
    }

    /// Substitute `M1 -> q^k1 M1`, `M2 -> q^k2 M2` (nonnegative shifts).
    pub fn shift_m(&self, k1: u32, k2: u32) -> Self {
        if k1 == 0 && k2 == 0 {
            return self.clone();
        }
        self.map_exponents(|(a, b, c)| (a + k1 * b + k2 * c, b, c))
    }

    /// Substitute `q = 1`; the result has no `q`.
    pub fn at_q_one(&self) -> Self {
        self.map_exponents(|(_, b, c)| (0, b, c))
    }

    /// Value at `q = v0^6`, `M1 = m1`, `M2 = m2` modulo `p`.
    pub fn eval_mod(&self, q0: u64, m1: u64, m2: u64, fp: &PrimeField) -> Result<u64, ArithError> {
        let mut acc = 0;
        for (e, c) in self.terms() {
            let c = fp.from_rational(c)?;
            let t = fp.mul(fp.mul(fp.pow(q0, e.0 as u64), fp.pow(m1, e.1 as u64)), fp.pow(m2, e.2 as u64));
            acc = fp.mul_add(acc, c, t);
        }
        Ok(acc)
    }

    /// Specialize `q = q0` modulo `p`, keeping `M1, M2` symbolic.
    pub fn to_bipoly(&self, q0: u64, fp: &PrimeField) -> Result<BiPoly, ArithError> {
        let mut cache: HashMap<u32, u64> = HashMap::new();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in self.terms() {
            let c = fp.from_rational(c)?;
            let qp = *cache.entry(e.0).or_insert_with(|| fp.pow(q0, e.0 as u64));
            terms.push((e.1 as usize, e.2 as usize, fp.mul(c, qp)));
        }
        Ok(BiPoly::from_terms(fp, terms))
    }

    /// Substitute `M1 = q^n1`, `M2 = q^n2`, giving a Laurent polynomial.
    pub fn at_q_powers(&self, n1: i64, n2: i64) -> QLaurent {
        QLaurent::from_terms(self.terms().map(|(e, c)| (6 * (e.0 as i64 + n1 * e.1 as i64 + n2 * e.2 as i64), c.clone())))
    }

    /// Largest absolute value of a numerator or denominator (for bounds).
    pub fn height_bits(&self) -> u64 {
        self.terms.iter().map(|(_, c)| c.numer().bits().max(c.denom().bits())).max().unwrap_or(0)
    }
}

fn small_ints(terms: &[(u64, BigRational)]) -> Option<Vec<(u64, i64)>> {
    terms
        .iter()
        .map(|(k, c)| if c.is_integer() { c.numer().to_i64().map(|v| (*k, v)) } else { None })
        .collect()
}

fn write_monomial(f: &mut fmt::Formatter<'_>, e: Exp3) -> fmt::Result {
    let mut first = true;
    for (name, k) in [("q", e.0), ("M1", e.1), ("M2", e.2)] {
        if k == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if k == 1 {
            write!(f, "{}", name)?;
        } else {
            write!(f, "{}^{}", name, k)?;
        }
    }
    Ok(())
}

impl fmt::Display for MPolyQMM {
    /// Terms in descending lex(q > M1 > M2) order, e.g. `q^2*M1 - 3/2*M2 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if *k == 0 {
                write!(f, "{}", a)?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", a)?;
                }
                write_monomial(f, unpack(*k))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((u32, u32, u32), i64)]) -> MPolyQMM {
        MPolyQMM::from_terms(terms.iter().map(|&(e, c)| (e, rat(c))))
    }

    #[test]
    fn content_split_examples() {
        let (c, pp) = p(&[((1, 1, 0), 2), ((1, 0, 1), 2)]).content_split().unwrap();
        assert_eq!(c, rat(2));
        assert_eq!(pp, p(&[((1, 1, 0), 1), ((1, 0, 1), 1)]));
        let (c, pp) = p(&[((0, 1, 0), -1)]).content_split().unwrap();
        assert_eq!((c, pp), (rat(-1), MPolyQMM::m1()));
        let x = MPolyQMM::monomial(BigRational::new(3.into(), 2.into()), (0, 1, 1));
        let (c, pp) = x.content_split().unwrap();
        assert_eq!(c, BigRational::new(3.into(), 2.into()));
        assert_eq!(pp, MPolyQMM::monomial(rat(1), (0, 1, 1)));
        assert!(MPolyQMM::zero().content_split().is_err());
    }

    #[test]
    fn division_and_display() {
        let a = MPolyQMM::binomial_minus_one(1, 1, 0);
        let b = MPolyQMM::binomial_minus_one(2, 0, 1).add(&MPolyQMM::m1());
        let ab = a.mul(&b);
        assert_eq!(ab.div_exact(&a), Some(b.clone()));
        assert_eq!(ab.div_exact(&b), Some(a.clone()));
        assert!(b.div_exact(&a).is_none());
        assert_eq!(a.to_string(), "q*M1 - 1");
        assert_eq!(b.to_string(), "q^2*M2 + M1 - 1");
        assert_eq!(a.shift_m(2, 0).to_string(), "q^3*M1 - 1");
        assert_eq!(a.at_q_powers(2, 0), QLaurent::q_pow(3).sub(&QLaurent::one()));
    }
}
