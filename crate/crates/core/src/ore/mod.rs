//! Operators `Σ c_b(q, M1, M2) L1^b1 L2^b2` of the localized q-Weyl algebra,
//! kept in M-before-L normal form with `L_i M_i = q M_i L_i`.

pub mod epsilon;
pub mod field;
pub mod lattice;
pub mod transport;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::arith::bipoly::RatFuncMod;
use crate::arith::gcd::gcd_many;
use crate::arith::modp::PrimeField;
use crate::arith::mpoly::MPolyQMM;
use crate::arith::qlaurent::QLaurent;
use crate::arith::ratfunc::RatFuncQMM;
use crate::arith::ArithError;
use crate::format::{pow_by_squaring, ExprTarget};
use crate::groebner::order::{LMono, TermOrder};
use crate::jones::SequenceTable;

pub use field::{CoeffField, ExactField, ModField};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum OreError {
    #[error("sequence value at ({0}, {1}) is outside the oracle's domain")]
    OutOfDomain(i64, i64),
    #[error("a coefficient denominator vanishes at ({0}, {1})")]
    SingularCoefficient(i64, i64),
    #[error("operator must be denominator-free (canonicalize to the integral flavor first)")]
    NotIntegral,
    #[error("zero operator")]
    ZeroOperator,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Operator with coefficients of type `E`, keyed by L-exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ore<E> {
    terms: BTreeMap<LMono, E>,
}

/// Operator over `Q(q, M1, M2)`.
pub type OreOp = Ore<RatFuncQMM>;
/// Operator with `q` specialized modulo a prime.
pub type OreOpMod = Ore<RatFuncMod>;

impl<E: Clone + PartialEq + fmt::Debug> Ore<E> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn from_terms<F: CoeffField<Elem = E>>(f: &F, terms: impl IntoIterator<Item = (LMono, E)>) -> Self {
        let mut out = Self::zero();
        for (b, c) in terms {
            out.add_term(f, b, c);
        }
        out
    }

    pub fn monomial<F: CoeffField<Elem = E>>(f: &F, c: E, b: LMono) -> Self {
        Self::from_terms(f, [(b, c)])
    }

    pub fn scalar<F: CoeffField<Elem = E>>(f: &F, c: E) -> Self {
        Self::monomial(f, c, (0, 0))
    }

    pub fn l_monomial<F: CoeffField<Elem = E>>(f: &F, b: LMono) -> Self {
        Self::monomial(f, f.one(), b)
    }

    fn add_term<F: CoeffField<Elem = E>>(&mut self, f: &F, b: LMono, c: E) {
        if f.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(x) => {
                let s = f.add(x, &c);
                if f.is_zero(&s) {
                    self.terms.remove(&b);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<LMono, E> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<LMono, E> {
        self.terms
    }

    pub fn coeff(&self, b: LMono) -> Option<&E> {
        self.terms.get(&b)
    }

    pub fn support(&self) -> Vec<LMono> {
        self.terms.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead_monomial(&self, order: &TermOrder) -> Option<LMono> {
        order.max(self.terms.keys().copied())
    }

    pub fn lead(&self, order: &TermOrder) -> Option<(LMono, &E)> {
        let b = self.lead_monomial(order)?;
        Some((b, &self.terms[&b]))
    }

    pub fn add<F: CoeffField<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.add_term(f, *b, c.clone());
        }
        out
    }

    pub fn sub<F: CoeffField<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.add_term(f, *b, f.neg(c));
        }
        out
    }

    pub fn neg<F: CoeffField<Elem = E>>(&self, f: &F) -> Self {
        Self { terms: self.terms.iter().map(|(b, c)| (*b, f.neg(c))).collect() }
    }

    /// `c · P`: the scalar sits to the left, so no shift is involved.
    pub fn scale_left<F: CoeffField<Elem = E>>(&self, f: &F, c: &E) -> Self {
        Self::from_terms(f, self.terms.iter().map(|(b, x)| (*b, f.mul(c, x))))
    }

    /// `P · c`.
    pub fn scale_right<F: CoeffField<Elem = E>>(&self, f: &F, c: &E) -> Self {
        Self::from_terms(f, self.terms.iter().map(|(b, x)| (*b, f.mul(x, &f.shift(c, b.0, b.1)))))
    }

    /// `c · L^m · P`.
    pub fn mul_term_left<F: CoeffField<Elem = E>>(&self, f: &F, c: &E, m: LMono) -> Self {
        Self::from_terms(
            f,
            self.terms.iter().map(|(b, x)| ((b.0 + m.0, b.1 + m.1), f.mul(c, &f.shift(x, m.0, m.1)))),
        )
    }

    /// Normal-form product `P · Q`.
    pub fn mul<F: CoeffField<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        let mut out = Self::zero();
        for (b, x) in &self.terms {
            for (c, y) in &o.terms {
                out.add_term(f, (b.0 + c.0, b.1 + c.1), f.mul(x, &f.shift(y, b.0, b.1)));
            }
        }
        out
    }

    pub fn pow<F: CoeffField<Elem = E>>(&self, f: &F, e: u32) -> Self {
        let mut acc = Self::scalar(f, f.one());
        for _ in 0..e {
            acc = acc.mul(f, self);
        }
        acc
    }

    /// `τ(P)(M1, M2, L1, L2) = P(M2, M1, L2, L1)`.
    pub fn tau<F: CoeffField<Elem = E>>(&self, f: &F) -> Self {
        Self { terms: self.terms.iter().map(|(b, c)| ((b.1, b.0), f.swap(c))).collect() }
    }

    /// Leading coefficient made 1 under `order`.
    pub fn monic<F: CoeffField<Elem = E>>(&self, f: &F, order: &TermOrder) -> Result<Self, OreError> {
        let (_, lc) = self.lead(order).ok_or(OreError::ZeroOperator)?;
        let inv = f.inv(lc).ok_or(OreError::ZeroOperator)?;
        Ok(self.scale_left(f, &inv))
    }

    pub fn map<G: Clone + PartialEq + fmt::Debug, F2: CoeffField<Elem = G>>(
        &self,
        target: &F2,
        mut m: impl FnMut(&E) -> G,
    ) -> Ore<G> {
        Ore::from_terms(target, self.terms.iter().map(|(b, c)| (*b, m(c))))
    }

    pub fn try_map<G: Clone + PartialEq + fmt::Debug, F2: CoeffField<Elem = G>, Er>(
        &self,
        target: &F2,
        mut m: impl FnMut(&E) -> Result<G, Er>,
    ) -> Result<Ore<G>, Er> {
        let mut v = Vec::with_capacity(self.len());
        for (b, c) in &self.terms {
            v.push((*b, m(c)?));
        }
        Ok(Ore::from_terms(target, v))
    }
}

/// Canonical form flavors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Monic,
    Integral,
}

impl OreOp {
    pub fn one() -> Self {
        Self::scalar(&ExactField, RatFuncQMM::one())
    }

    pub fn l1() -> Self {
        Self::l_monomial(&ExactField, (1, 0))
    }

    pub fn l2() -> Self {
        Self::l_monomial(&ExactField, (0, 1))
    }

    pub fn from_poly_terms(terms: impl IntoIterator<Item = (LMono, MPolyQMM)>) -> Self {
        Self::from_terms(&ExactField, terms.into_iter().map(|(b, p)| (b, RatFuncQMM::from_poly(p))))
    }

    /// True if every coefficient is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.terms.values().all(|c| c.is_polynomial())
    }

    /// Polynomial coefficients, if denominator-free.
    pub fn poly_terms(&self) -> Option<Vec<(LMono, MPolyQMM)>> {
        self.terms
            .iter()
            .map(|(b, c)| if c.is_polynomial() { Some((*b, c.num().clone())) } else { None })
            .collect()
    }

    pub fn canonicalize(&self, order: &TermOrder, flavor: Flavor) -> Result<Self, OreError> {
        match flavor {
            Flavor::Monic => self.monic(&ExactField, order),
            Flavor::Integral => self.integral(order),
        }
    }

    /// Denominators cleared, coefficient content removed, and the leading
    /// coefficient's lex-leading term positive.
    pub fn integral(&self, order: &TermOrder) -> Result<Self, OreError> {
        if self.is_zero() {
            return Err(OreError::ZeroOperator);
        }
        let mut lcm = MPolyQMM::one();
        for c in self.terms.values() {
            let d = c.den();
            if d.is_one() {
                continue;
            }
            let g = crate::arith::gcd::gcd(&lcm, d);
            lcm = lcm.mul(&d.div_exact(&g).expect("gcd divides"));
        }
        let nums: Vec<(LMono, MPolyQMM)> = self
            .terms
            .iter()
            .map(|(b, c)| {
                let f = lcm.div_exact(c.den()).expect("lcm is a multiple");
                (*b, c.num().mul(&f))
            })
            .collect();
        let g = gcd_many(nums.iter().map(|(_, p)| p));
        let mut out: Vec<(LMono, MPolyQMM)> =
            nums.into_iter().map(|(b, p)| (b, if g.is_one() { p } else { p.div_exact(&g).expect("gcd divides") })).collect();
        // rational content
        let mut num_g = BigInt::from(0);
        let mut den_l = BigInt::one();
        for (_, p) in &out {
            for (_, c) in p.terms() {
                num_g = num_integer::Integer::gcd(&num_g, c.numer());
                den_l = num_integer::Integer::lcm(&den_l, c.denom());
            }
        }
        let lead = order.max(out.iter().map(|(b, _)| *b)).unwrap();
        let lead_poly = &out.iter().find(|(b, _)| *b == lead).unwrap().1;
        let sign_neg = lead_poly.lead().map(|(_, c)| c.is_negative()).unwrap_or(false);
        let mut s = BigRational::new(den_l, num_g);
        if sign_neg {
            s = -s;
        }
        if !s.is_one() {
            out = out.into_iter().map(|(b, p)| (b, p.scale(&s))).collect();
        }
        Ok(Self::from_poly_terms(out))
    }

    pub fn to_mod(&self, q0: u64, fp: &PrimeField) -> Result<OreOpMod, ArithError> {
        let mf = ModField::new(fp.clone(), q0);
        self.try_map(&mf, |c| c.to_mod(q0, fp))
    }

    /// Total M-degree and q-degree over all coefficient numerators.
    pub fn degrees(&self) -> (u32, u32) {
        let mut dm = 0;
        let mut dq = 0;
        for c in self.terms.values() {
            dm = dm.max(c.num().total_degree_m()).max(c.den().total_degree_m());
            dq = dq.max(c.num().degree_q()).max(c.den().degree_q());
        }
        (dm, dq)
    }
}

/// `P · Q` over `Q(q, M1, M2)`.
pub fn ore_mul(p: &OreOp, q: &OreOp) -> OreOp {
    p.mul(&ExactField, q)
}

pub fn tau_map(p: &OreOp) -> OreOp {
    p.tau(&ExactField)
}

/// Symbolic sequence access.
pub trait SymbolicOracle {
    fn value(&self, n1: i64, n2: i64) -> Option<QLaurent>;
}

/// Sequence access modulo a prime at `q = q0`.
pub trait ModularOracle {
    fn value_mod(&self, n1: i64, n2: i64) -> Option<u64>;
}

impl SymbolicOracle for SequenceTable {
    fn value(&self, n1: i64, n2: i64) -> Option<QLaurent> {
        if self.contains(n1, n2) {
            self.symbolic(n1 as u32, n2 as u32).cloned()
        } else {
            None
        }
    }
}

impl ModularOracle for SequenceTable {
    fn value_mod(&self, n1: i64, n2: i64) -> Option<u64> {
        if self.contains(n1, n2) {
            self.modular(n1 as u32, n2 as u32)
        } else {
            None
        }
    }
}

/// Closure-backed oracle.
pub struct FnOracle<F>(pub F);

impl<F: Fn(i64, i64) -> Option<QLaurent>> SymbolicOracle for FnOracle<F> {
    fn value(&self, n1: i64, n2: i64) -> Option<QLaurent> {
        (self.0)(n1, n2)
    }
}

impl<F: Fn(i64, i64) -> Option<u64>> ModularOracle for FnOracle<F> {
    fn value_mod(&self, n1: i64, n2: i64) -> Option<u64> {
        (self.0)(n1, n2)
    }
}

/// A value of `Q(v)` kept as an unreduced fraction.
#[derive(Clone, Debug)]
pub struct Frac {
    pub num: QLaurent,
    pub den: QLaurent,
}

impl Frac {
    pub fn from_laurent(x: QLaurent) -> Self {
        Self { num: x, den: QLaurent::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The exact quotient when it is a Laurent polynomial.
    pub fn to_laurent(&self) -> Option<QLaurent> {
        self.num.div_exact(&self.den)
    }
}

/// `(P f)(n1, n2) = Σ c_b(q, q^n1, q^n2) f(n1 + b1, n2 + b2)`.
pub fn ore_apply<O: SymbolicOracle + ?Sized>(p: &OreOp, f: &O, n1: i64, n2: i64) -> Result<Frac, OreError> {
    let mut num = QLaurent::zero();
    let mut den = QLaurent::one();
    for (b, c) in p.terms() {
        let (m1, m2) = (n1 + b.0 as i64, n2 + b.1 as i64);
        let val = f.value(m1, m2).ok_or(OreError::OutOfDomain(m1, m2))?;
        let (cn, cd) = c.at_q_powers(n1, n2);
        if cd.is_zero() {
            return Err(OreError::SingularCoefficient(n1, n2));
        }
        let t = cn.mul(&val);
        if cd.is_one() {
            num = num.add(&if den.is_one() { t } else { t.mul(&den) });
        } else {
            num = num.mul(&cd).add(&t.mul(&den));
            den = den.mul(&cd);
        }
    }
    Ok(Frac { num, den })
}

/// Modular action at `q = q0`.
pub fn ore_apply_mod<O: ModularOracle + ?Sized>(
    p: &OreOp,
    f: &O,
    q0: u64,
    fp: &PrimeField,
    n1: i64,
    n2: i64,
) -> Result<u64, OreError> {
    let m1 = fp.pow_i(q0, n1).ok_or(OreError::SingularCoefficient(n1, n2))?;
    let m2 = fp.pow_i(q0, n2).ok_or(OreError::SingularCoefficient(n1, n2))?;
    let mut acc = 0;
    for (b, c) in p.terms() {
        let (a1, a2) = (n1 + b.0 as i64, n2 + b.1 as i64);
        let val = f.value_mod(a1, a2).ok_or(OreError::OutOfDomain(a1, a2))?;
        let cv = c.eval_mod(q0, m1, m2, fp).map_err(|_| OreError::SingularCoefficient(n1, n2))?;
        acc = fp.mul_add(acc, cv, val);
    }
    Ok(acc)
}

/// Modular action of an operator whose `q` is already specialized to `q0`.
pub fn ore_apply_modop<O: ModularOracle + ?Sized>(
    p: &OreOpMod,
    f: &O,
    q0: u64,
    fp: &PrimeField,
    n1: i64,
    n2: i64,
) -> Result<u64, OreError> {
    let m1 = fp.pow_i(q0, n1).ok_or(OreError::SingularCoefficient(n1, n2))?;
    let m2 = fp.pow_i(q0, n2).ok_or(OreError::SingularCoefficient(n1, n2))?;
    let mut acc = 0;
    for (b, c) in p.terms() {
        let (a1, a2) = (n1 + b.0 as i64, n2 + b.1 as i64);
        let val = f.value_mod(a1, a2).ok_or(OreError::OutOfDomain(a1, a2))?;
        let cv = c.eval(fp, m1, m2).ok_or(OreError::SingularCoefficient(n1, n2))?;
        acc = fp.mul_add(acc, cv, val);
    }
    Ok(acc)
}

impl ExprTarget for OreOp {
    fn from_int(n: &BigInt) -> Self {
        Self::scalar(&ExactField, RatFuncQMM::from_rational(BigRational::from_integer(n.clone())))
    }
    fn var(name: &str) -> Option<Self> {
        match name {
            "L1" => Some(Self::l1()),
            "L2" => Some(Self::l2()),
            _ => <RatFuncQMM as ExprTarget>::var(name).map(|c| Self::scalar(&ExactField, c)),
        }
    }
    fn add(&self, o: &Self) -> Self {
        Ore::add(self, &ExactField, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Ore::sub(self, &ExactField, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Ore::mul(self, &ExactField, o)
    }
    fn neg(&self) -> Self {
        Ore::neg(self, &ExactField)
    }
    fn div(&self, o: &Self) -> Result<Self, String> {
        if o.is_zero() {
            return Err("division by zero".into());
        }
        if o.len() != 1 || o.coeff((0, 0)).is_none() {
            return Err("can only divide by elements of the coefficient field".into());
        }
        let inv = o.coeff((0, 0)).unwrap().inv().map_err(|e| e.to_string())?;
        Ok(self.scale_right(&ExactField, &inv))
    }
    fn pow(&self, e: i64) -> Result<Self, String> {
        if e < 0 && (self.len() != 1 || self.coeff((0, 0)).is_none()) {
            return Err("negative powers of shift operators are not allowed".into());
        }
        pow_by_squaring(self, e, OreOp::one())
    }
    fn call(name: &str, arg: &Self) -> Result<Self, String> {
        match name {
            "tau" => Ok(tau_map(arg)),
            _ => Err(format!("unknown function '{name}'")),
        }
    }
}

impl fmt::Display for OreOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let m = crate::format::fmt_l_monomial(b.0, b.1);
            if m.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}
