//! Coefficient fields for operators: elements of `Q(q, M1, M2)` or an
//! image of it, together with the shift `M_i -> q^k M_i` and the swap
//! `M1 <-> M2`.

use std::fmt;

use crate::arith::bipoly::{BiPoly, RatFuncMod};
use crate::arith::modp::PrimeField;
use crate::arith::ratfunc::RatFuncQMM;

pub trait CoeffField: Clone + fmt::Debug {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// `a(q^k1 M1, q^k2 M2)`.
    fn shift(&self, a: &Self::Elem, k1: u32, k2: u32) -> Self::Elem;
    /// `a(M2, M1)`.
    fn swap(&self, a: &Self::Elem) -> Self::Elem;

    fn is_one(&self, a: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, &self.one()))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        Some(self.mul(a, &self.inv(b)?))
    }
}

/// `Q(q, M1, M2)` with canonical reduced fractions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExactField;

impl CoeffField for ExactField {
    type Elem = RatFuncQMM;

    fn zero(&self) -> RatFuncQMM {
        RatFuncQMM::zero()
    }
    fn one(&self) -> RatFuncQMM {
        RatFuncQMM::one()
    }
    fn from_i64(&self, n: i64) -> RatFuncQMM {
        RatFuncQMM::from_int(n)
    }
    fn is_zero(&self, a: &RatFuncQMM) -> bool {
        a.is_zero()
    }
    fn is_one(&self, a: &RatFuncQMM) -> bool {
        a.is_one()
    }
    fn add(&self, a: &RatFuncQMM, b: &RatFuncQMM) -> RatFuncQMM {
        a.add(b)
    }
    fn sub(&self, a: &RatFuncQMM, b: &RatFuncQMM) -> RatFuncQMM {
        a.sub(b)
    }
    fn mul(&self, a: &RatFuncQMM, b: &RatFuncQMM) -> RatFuncQMM {
        a.mul(b)
    }
    fn neg(&self, a: &RatFuncQMM) -> RatFuncQMM {
        a.neg()
    }
    fn inv(&self, a: &RatFuncQMM) -> Option<RatFuncQMM> {
        a.inv().ok()
    }
    fn shift(&self, a: &RatFuncQMM, k1: u32, k2: u32) -> RatFuncQMM {
        a.shift_m(k1, k2)
    }
    fn swap(&self, a: &RatFuncQMM) -> RatFuncQMM {
        a.swap_m()
    }
}

/// `F_p(M1, M2)` with `q` specialized to `q0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModField {
    pub fp: PrimeField,
    pub q0: u64,
}

impl ModField {
    pub fn new(fp: PrimeField, q0: u64) -> Self {
        Self { fp, q0 }
    }

    /// The specialization of an exact element; `None` if its denominator
    /// vanishes at `q0`.
    pub fn image(&self, a: &RatFuncQMM) -> Option<RatFuncMod> {
        a.to_mod(self.q0, &self.fp).ok()
    }
}

impl CoeffField for ModField {
    type Elem = RatFuncMod;

    fn zero(&self) -> RatFuncMod {
        RatFuncMod::zero()
    }
    fn one(&self) -> RatFuncMod {
        RatFuncMod::one()
    }
    fn from_i64(&self, n: i64) -> RatFuncMod {
        RatFuncMod::from_poly(BiPoly::constant(self.fp.from_i64(n)))
    }
    fn is_zero(&self, a: &RatFuncMod) -> bool {
        a.is_zero()
    }
    fn is_one(&self, a: &RatFuncMod) -> bool {
        a.is_one()
    }
    fn add(&self, a: &RatFuncMod, b: &RatFuncMod) -> RatFuncMod {
        a.add(&self.fp, b)
    }
    fn sub(&self, a: &RatFuncMod, b: &RatFuncMod) -> RatFuncMod {
        a.sub(&self.fp, b)
    }
    fn mul(&self, a: &RatFuncMod, b: &RatFuncMod) -> RatFuncMod {
        a.mul(&self.fp, b)
    }
    fn neg(&self, a: &RatFuncMod) -> RatFuncMod {
        a.neg(&self.fp)
    }
    fn inv(&self, a: &RatFuncMod) -> Option<RatFuncMod> {
        if a.is_zero() {
            None
        } else {
            Some(a.inv(&self.fp))
        }
    }
    fn shift(&self, a: &RatFuncMod, k1: u32, k2: u32) -> RatFuncMod {
        if k1 == 0 && k2 == 0 {
            return a.clone();
        }
        let c1 = self.fp.pow(self.q0, k1 as u64);
        let c2 = self.fp.pow(self.q0, k2 as u64);
        a.scale_vars(&self.fp, c1, c2)
    }
    fn swap(&self, a: &RatFuncMod) -> RatFuncMod {
        a.swap_vars(&self.fp)
    }
}
