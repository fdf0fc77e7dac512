//! Laurent polynomials in `v` with rational coefficients, where `q = v^6`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::modp::PrimeField;
use super::ArithError;

/// Exact Laurent polynomial in `v`; terms sorted by exponent, no zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QLaurent {
    terms: Vec<(i64, BigRational)>,
}

impl QLaurent {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::monomial(BigRational::from_integer(n.into()), 0)
    }

    pub fn from_rational(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * v^e`.
    pub fn monomial(c: BigRational, e: i64) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Self { terms: vec![(e, c)] }
        }
    }

    /// `v^e`.
    pub fn v_pow(e: i64) -> Self {
        Self::monomial(BigRational::one(), e)
    }

    /// `q^k = v^(6k)`.
    pub fn q_pow(k: i64) -> Self {
        Self::v_pow(6 * k)
    }

    /// Build from arbitrary `(exponent, coefficient)` pairs, summing duplicates.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, BigRational)>) -> Self {
        let mut map: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *map.entry(e).or_insert_with(BigRational::zero) += c;
        }
        Self { terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Dense integer coefficients: `coeffs[i]` multiplies `v^(offset + i)`.
    pub fn from_dense_int(offset: i64, coeffs: &[BigInt]) -> Self {
        Self {
            terms: coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (offset + i as i64, BigRational::from_integer(c.clone())))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(i64, BigRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }

    /// True iff every exponent is a multiple of 6 and every coefficient is
    /// an integer, i.e. the value lies in `Z[q, q^-1]`.
    pub fn is_integral_in_q(&self) -> bool {
        self.terms.iter().all(|(e, c)| e % 6 == 0 && c.is_integer())
    }

    /// Coefficients in `q` when integral: `(q-exponent, integer)` pairs.
    pub fn q_terms(&self) -> Option<Vec<(i64, BigInt)>> {
        if !self.is_integral_in_q() {
            return None;
        }
        Some(self.terms.iter().map(|(e, c)| (e / 6, c.to_integer())).collect())
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
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
        Self { terms: out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }

    /// Multiply by `v^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut map: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                *map.entry(e1 + e2).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        Self { terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Exact quotient in `Q[v, v^-1]`, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let d_lo = d.min_exp().unwrap();
        let d_hi = d.max_exp().unwrap();
        let lc = d.terms.last().unwrap().1.clone();
        let mut rem: BTreeMap<i64, BigRational> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((&e, _)) = rem.iter().next_back() {
            let lo = *rem.keys().next().unwrap();
            if e - lo < d_hi - d_lo {
                return None;
            }
            let c = rem.remove(&e).unwrap() / &lc;
            let shift = e - d_hi;
            for (de, dc) in &d.terms[..d.terms.len() - 1] {
                let k = de + shift;
                let entry = rem.entry(k).or_insert_with(BigRational::zero);
                *entry -= &c * dc;
                if entry.is_zero() {
                    rem.remove(&k);
                }
            }
            quot.push((shift, c));
        }
        quot.reverse();
        Some(Self { terms: quot })
    }

    /// Value at `v = 1`.
    pub fn at_one(&self) -> BigRational {
        self.terms.iter().map(|(_, c)| c.clone()).fold(BigRational::zero(), |a, b| a + b)
    }

    /// `Σ c · v0^e mod p`.
    pub fn eval_mod(&self, v0: u64, fp: &PrimeField) -> Result<u64, ArithError> {
        let v = v0 % fp.p();
        if v == 0 {
            return Err(ArithError::InvalidSpecialization(v0));
        }
        let vinv = fp.inv(v).unwrap();
        let mut acc = 0;
        for (e, c) in &self.terms {
            let c = fp.from_rational(c)?;
            let pw = if *e >= 0 { fp.pow(v, *e as u64) } else { fp.pow(vinv, e.unsigned_abs()) };
            acc = fp.mul_add(acc, c, pw);
        }
        Ok(acc)
    }

    /// Largest absolute coefficient, when all coefficients are integers.
    pub fn max_abs_int(&self) -> Option<BigInt> {
        self.terms
            .iter()
            .map(|(_, c)| if c.is_integer() { Some(c.to_integer().abs()) } else { None })
            .try_fold(BigInt::zero(), |m, x| x.map(|x| if x > m { x } else { m }))
    }
}

impl fmt::Display for QLaurent {
    /// Written in `q` when every exponent is a multiple of 6, otherwise in `v`;
    /// highest exponent first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let in_q = self.terms.iter().all(|(e, _)| e % 6 == 0);
        let (var, div) = if in_q { ("q", 6) } else { ("v", 1) };
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let k = e / div;
            if k == 0 {
                write!(f, "{}", a)?;
                continue;
            }
            if !a.is_one() {
                write!(f, "{}*", a)?;
            }
            match k {
                1 => write!(f, "{}", var)?,
                _ => write!(f, "{}^{}", var, k)?,
            }
        }
        Ok(())
    }
}

/// Small-integer view used by fast paths: `None` if any coefficient is not
/// an integer fitting in `i64`.
pub fn to_i64_terms(x: &QLaurent) -> Option<Vec<(i64, i64)>> {
    x.terms
        .iter()
        .map(|(e, c)| if c.is_integer() { c.to_integer().to_i64().map(|c| (*e, c)) } else { None })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn eval_mod_examples() {
        let fp7 = PrimeField::new(7).unwrap();
        let x = QLaurent::q_pow(1).add(&QLaurent::q_pow(-1));
        // q = 64 = 1 mod 7, so the value is 1 + 1
        assert_eq!(x.eval_mod(2, &fp7).unwrap(), 2);
        let fp = PrimeField::default_field();
        assert_eq!(QLaurent::zero().eval_mod(2, &fp).unwrap(), 0);
        assert_eq!(QLaurent::v_pow(3).eval_mod(2, &fp).unwrap(), 8);
        let half = QLaurent::monomial(BigRational::new(1.into(), 7.into()), 0);
        assert!(matches!(half.eval_mod(2, &fp7), Err(ArithError::UnluckyPrime(7))));
    }

    #[test]
    fn exact_division_and_display() {
        let a = QLaurent::from_terms([(3, r(1)), (-3, r(-1))]);
        let b = QLaurent::from_terms([(9, r(1)), (-9, r(-1))]);
        let quo = b.div_exact(&a).unwrap();
        assert_eq!(quo, QLaurent::from_terms([(6, r(1)), (0, r(1)), (-6, r(1))]));
        assert_eq!(quo.to_string(), "q + 1 + q^-1");
        assert!(a.div_exact(&quo).is_none());
        assert_eq!(QLaurent::v_pow(3).add(&QLaurent::v_pow(-3)).to_string(), "v^3 + v^-3");
    }
}
