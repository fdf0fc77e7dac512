//! Reduced rational functions in `(q, M1, M2)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use super::bipoly::{BiPoly, RatFuncMod};
use super::gcd::gcd;
use super::modp::PrimeField;
use super::mpoly::MPolyQMM;
use super::qlaurent::QLaurent;
use super::ArithError;

/// `num / den` with `gcd(num, den) = 1`, `den` primitive over `Z` with a
/// positive lex(q > M1 > M2) leading coefficient. Zero is `0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFuncQMM {
    num: MPolyQMM,
    den: MPolyQMM,
}

impl Default for RatFuncQMM {
    fn default() -> Self {
        Self::zero()
    }
}

impl RatFuncQMM {
    pub fn zero() -> Self {
        Self { num: MPolyQMM::zero(), den: MPolyQMM::one() }
    }

    pub fn one() -> Self {
        Self::from_poly(MPolyQMM::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_poly(MPolyQMM::from_int(n))
    }

    pub fn from_rational(c: BigRational) -> Self {
        Self::from_poly(MPolyQMM::constant(c))
    }

    pub fn from_poly(p: MPolyQMM) -> Self {
        Self { num: p, den: MPolyQMM::one() }
    }

    /// Canonical reduced fraction.
    pub fn canonical(num: MPolyQMM, den: MPolyQMM) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let (cd, pd) = den.content_split()?;
        if pd.is_one() {
            return Ok(Self { num: num.scale(&cd.recip()), den: pd });
        }
        let (cn, pn) = num.content_split()?;
        let g = gcd(&pn, &pd);
        let scale = cn / cd;
        if g.is_one() {
            return Ok(Self { num: pn.scale(&scale), den: pd });
        }
        let pn = pn.div_exact(&g).expect("gcd divides numerator");
        let pd = pd.div_exact(&g).expect("gcd divides denominator");
        Ok(Self { num: pn.scale(&scale), den: pd })
    }

    pub fn num(&self) -> &MPolyQMM {
        &self.num
    }

    pub fn den(&self) -> &MPolyQMM {
        &self.den
    }

    pub fn into_parts(self) -> (MPolyQMM, MPolyQMM) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return Self::from_poly(self.num.add(&o.num));
        }
        if self.den == o.den {
            return Self::canonical(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Self::canonical(n, self.den.mul(&o.den)).unwrap()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Self::from_poly(self.num.mul(&o.num));
        }
        Self::canonical(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn mul_poly(&self, p: &MPolyQMM) -> Self {
        if self.den.is_one() {
            return Self::from_poly(self.num.mul(p));
        }
        Self::canonical(self.num.mul(p), self.den.clone()).unwrap()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { num: self.num.scale(c), den: if c.is_zero() { MPolyQMM::one() } else { self.den.clone() } }
    }

    pub fn inv(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Self::canonical(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Result<Self, ArithError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn swap_m(&self) -> Self {
        Self::canonical(self.num.swap_m(), self.den.swap_m()).unwrap()
    }

    /// `R(q, q^k1 M1, q^k2 M2)`.
    pub fn shift_m(&self, k1: u32, k2: u32) -> Self {
        if k1 == 0 && k2 == 0 {
            return self.clone();
        }
        if self.den.is_one() {
            return Self::from_poly(self.num.shift_m(k1, k2));
        }
        // shifting preserves coprimality; only the sign/content may move
        Self::canonical(self.num.shift_m(k1, k2), self.den.shift_m(k1, k2)).unwrap()
    }

    pub fn eval_mod(&self, q0: u64, m1: u64, m2: u64, fp: &PrimeField) -> Result<u64, ArithError> {
        let d = self.den.eval_mod(q0, m1, m2, fp)?;
        let dinv = fp.inv(d).ok_or(ArithError::UnluckyPrime(fp.p()))?;
        Ok(fp.mul(self.num.eval_mod(q0, m1, m2, fp)?, dinv))
    }

    /// Specialize `q = q0` mod `p`.
    pub fn to_mod(&self, q0: u64, fp: &PrimeField) -> Result<RatFuncMod, ArithError> {
        let d = self.den.to_bipoly(q0, fp)?;
        if d.is_zero() {
            return Err(ArithError::UnluckyPrime(fp.p()));
        }
        let n: BiPoly = self.num.to_bipoly(q0, fp)?;
        Ok(RatFuncMod::new(fp, n, d))
    }

    /// Value at `M1 = q^n1, M2 = q^n2` as a pair `(numerator, denominator)`.
    pub fn at_q_powers(&self, n1: i64, n2: i64) -> (QLaurent, QLaurent) {
        (self.num.at_q_powers(n1, n2), self.den.at_q_powers(n1, n2))
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }
}

impl From<MPolyQMM> for RatFuncQMM {
    fn from(p: MPolyQMM) -> Self {
        Self::from_poly(p)
    }
}

impl fmt::Display for RatFuncQMM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Helper for building values in tests and parsers.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((u32, u32, u32), i64)]) -> MPolyQMM {
        MPolyQMM::from_terms(terms.iter().map(|&(e, c)| (e, rat(c, 1))))
    }

    #[test]
    fn canonical_examples() {
        // (q M1 - q) / (M1 - 1) = q
        let r = RatFuncQMM::canonical(p(&[((1, 1, 0), 1), ((1, 0, 0), -1)]), p(&[((0, 1, 0), 1), ((0, 0, 0), -1)])).unwrap();
        assert_eq!(r.num(), &MPolyQMM::q());
        assert!(r.den().is_one());
        // M1 / (-M2) = (-M1) / M2
        let r = RatFuncQMM::canonical(MPolyQMM::m1(), MPolyQMM::m2().neg()).unwrap();
        assert_eq!(r.num(), &MPolyQMM::m1().neg());
        assert_eq!(r.den(), &MPolyQMM::m2());
        let r = RatFuncQMM::canonical(MPolyQMM::zero(), MPolyQMM::m1()).unwrap();
        assert!(r.is_zero() && r.den().is_one());
        assert!(RatFuncQMM::canonical(MPolyQMM::m1(), MPolyQMM::zero()).is_err());
    }

    #[test]
    fn field_identities() {
        let a = RatFuncQMM::canonical(p(&[((1, 1, 0), 2), ((0, 0, 1), 1)]), p(&[((0, 1, 1), 1), ((2, 0, 0), -1)])).unwrap();
        let b = RatFuncQMM::canonical(p(&[((0, 1, 0), 1), ((0, 0, 0), 3)]), p(&[((1, 0, 1), 1), ((0, 0, 0), -1)])).unwrap();
        assert_eq!(a.add(&b).sub(&b), a);
        assert_eq!(a.mul(&b).div(&b).unwrap(), a);
        assert_eq!(a.mul(&a.inv().unwrap()), RatFuncQMM::one());
        assert_eq!(a.shift_m(1, 2).shift_m(1, 0), a.shift_m(2, 2));
        assert_eq!(a.swap_m().swap_m(), a);
    }
}
