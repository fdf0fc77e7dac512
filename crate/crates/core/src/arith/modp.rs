//! Prime fields `Z/pZ` for word-sized primes below `2^31`.
//!
//! Residues are stored as `u64` in `[0, p)`. Products of two residues fit in
//! 62 bits, so a single Barrett step reduces them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ArithError;

/// The Mersenne prime `2^31 - 1`, the default modulus throughout the crate.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// `Z/pZ` for an odd prime `p < 2^31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
    barrett: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, ArithError> {
        if p < 3 || p >= (1 << 31) || !is_prime_u64(p) {
            return Err(ArithError::InvalidModulus(p));
        }
        Ok(Self { p, barrett: u64::MAX / p })
    }

    /// The default field `Z/(2^31-1)`.
    pub fn default_field() -> Self {
        Self::new(DEFAULT_PRIME).unwrap()
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        let q = ((x as u128 * self.barrett as u128) >> 64) as u64;
        let r = x - q * self.p;
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }

    /// `acc + a*b`, with `acc, a, b < p`.
    #[inline]
    pub fn mul_add(&self, acc: u64, a: u64, b: u64) -> u64 {
        self.reduce(acc + a * b)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// `a^e` for a signed exponent; `None` when `e < 0` and `a = 0`.
    pub fn pow_i(&self, a: u64, e: i64) -> Option<u64> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            self.inv(a).map(|ai| self.pow(ai, e.unsigned_abs()))
        }
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        // extended Euclid on signed values
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(if t0 < 0 { (t0 + self.p as i64) as u64 } else { t0 as u64 })
    }

    pub fn from_i64(&self, n: i64) -> u64 {
        let r = n.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_bigint(&self, n: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        n.mod_floor(&p).to_u64().unwrap()
    }

    /// Image of a rational number; fails when `p` divides the denominator.
    pub fn from_rational(&self, r: &BigRational) -> Result<u64, ArithError> {
        let den = self.from_bigint(r.denom());
        let inv = self.inv(den).ok_or(ArithError::UnluckyPrime(self.p))?;
        Ok(self.mul(self.from_bigint(r.numer()), inv))
    }

    /// Representative in `(-p/2, p/2]`.
    pub fn to_symmetric(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    /// Multiplicative order of a nonzero residue.
    pub fn order(&self, a: u64) -> u64 {
        assert!(a != 0, "zero has no multiplicative order");
        let mut ord = self.p - 1;
        for (f, _) in factor_u64(self.p - 1) {
            while ord % f == 0 && self.pow(a, ord / f) == 1 {
                ord /= f;
            }
        }
        ord
    }
}

/// A residue together with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModScalar {
    pub residue: u64,
    pub p: u64,
}

impl ModScalar {
    pub fn new(residue: u64, p: u64) -> Self {
        Self { residue: residue % p, p }
    }
}

impl std::fmt::Display for ModScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.residue)
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, a, m);
        }
        a = mul_mod_u64(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Trial-division factorization, adequate for numbers below `2^62`.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n % f == 0 {
            let mut k = 0;
            while n % f == 0 {
                n /= f;
                k += 1;
            }
            out.push((f, k));
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Primes below `2^31` in decreasing order, starting at `2^31 - 1`.
pub fn primes_below_2_31() -> impl Iterator<Item = u64> {
    (3..DEFAULT_PRIME + 1).rev().filter(|&n| n % 2 == 1 && is_prime_u64(n))
}

/// Chinese remaindering of `a mod m` with `b mod p` (`gcd(m, p) = 1`).
pub fn crt_combine(a: &BigInt, m: &BigInt, b: u64, fp: &PrimeField) -> BigInt {
    // x = a + m * ((b - a) / m mod p)
    let a_mod = fp.from_bigint(a);
    let m_inv = fp.inv(fp.from_bigint(m)).expect("moduli must be coprime");
    let t = fp.mul(fp.sub(b, a_mod), m_inv);
    a + m * BigInt::from(t)
}

/// Wang's rational reconstruction: find `n/d` with `|n|, d <= sqrt(m/2)` and
/// `n = a d (mod m)`.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let a = a.mod_floor(m);
    if a.is_zero() {
        return Some(BigRational::zero());
    }
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::from(1));
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one_abs() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

trait IsOneAbs {
    fn is_one_abs(&self) -> bool;
}

impl IsOneAbs for BigInt {
    fn is_one_abs(&self) -> bool {
        self.abs() == BigInt::from(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_basics() {
        let f = PrimeField::default_field();
        let a = 123_456_789;
        let ai = f.inv(a).unwrap();
        assert_eq!(f.mul(a, ai), 1);
        assert_eq!(f.pow(2, 31), 1);
        assert_eq!(f.order(64), 31);
        assert_eq!(f.from_i64(-1), DEFAULT_PRIME - 1);
        assert_eq!(f.to_symmetric(DEFAULT_PRIME - 5), -5);
        assert!(PrimeField::new(2_147_483_646).is_err());
        assert!(PrimeField::new(4_294_967_311).is_err());
    }

    #[test]
    fn barrett_matches_remainder() {
        let f = PrimeField::new(2_147_483_629).unwrap();
        for x in [0u64, 1, f.p() - 1, f.p(), (f.p() - 1) * (f.p() - 1), u64::MAX / 2] {
            assert_eq!(f.reduce(x), x % f.p());
        }
    }

    #[test]
    fn first_primes() {
        let ps: Vec<u64> = primes_below_2_31().take(3).collect();
        assert_eq!(ps, vec![2_147_483_647, 2_147_483_629, 2_147_483_587]);
    }

    #[test]
    fn crt_and_reconstruction() {
        let f1 = PrimeField::new(2_147_483_647).unwrap();
        let f2 = PrimeField::new(2_147_483_629).unwrap();
        let x = BigRational::new(BigInt::from(-12345), BigInt::from(678));
        let r1 = f1.from_rational(&x).unwrap();
        let r2 = f2.from_rational(&x).unwrap();
        let m1 = BigInt::from(f1.p());
        let c = crt_combine(&BigInt::from(r1), &m1, r2, &f2);
        let m = m1 * BigInt::from(f2.p());
        assert_eq!(rational_reconstruct(&c, &m), Some(x));
    }
}
