//! The specialization `q = 1`, landing in the commutative ring
//! `Q[M1, M2, L1, L2]`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::gcd::gcd_many;
use crate::arith::mpoly::MPolyQMM;
use crate::format::{fmt_sum, pow_by_squaring, ExprTarget};

use super::{OreError, OreOp};

/// Exponents `[M1, M2, L1, L2]`.
pub type Exp4 = [u32; 4];

/// Commutative polynomial in `M1, M2, L1, L2` over the rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommPoly {
    terms: BTreeMap<Exp4, BigRational>,
}

impl CommPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exp4, BigRational)>) -> Self {
        let mut m: BTreeMap<Exp4, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *m.entry(e).or_insert_with(BigRational::zero) += c;
        }
        m.retain(|_, c| !c.is_zero());
        Self { terms: m }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_terms([([0; 4], c)])
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::from_terms([(e, BigRational::one())])
    }

    pub fn terms(&self) -> &BTreeMap<Exp4, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(o.terms.iter()).map(|(e, c)| (*e, c.clone())))
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut v = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (e, c) in &self.terms {
            for (f, d) in &o.terms {
                v.push(([e[0] + f[0], e[1] + f[1], e[2] + f[2], e[3] + f[3]], c * d));
            }
        }
        Self::from_terms(v)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c * s)))
    }

    /// Coefficients of the L-monomials as polynomials in `M1, M2`
    /// (stored with `q`-exponent zero).
    pub fn l_coefficients(&self) -> BTreeMap<(u32, u32), MPolyQMM> {
        let mut m: BTreeMap<(u32, u32), Vec<((u32, u32, u32), BigRational)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            m.entry((e[2], e[3])).or_default().push(((0, e[0], e[1]), c.clone()));
        }
        m.into_iter().map(|(k, v)| (k, MPolyQMM::from_terms(v))).collect()
    }

    fn from_l_coefficients(m: &BTreeMap<(u32, u32), MPolyQMM>) -> Self {
        Self::from_terms(
            m.iter().flat_map(|(b, p)| p.terms().map(move |(e, c)| ([e.1, e.2, b.0, b.1], c.clone())).collect::<Vec<_>>()),
        )
    }

    /// The gcd in `Q[M1, M2]` of the L-coefficients.
    pub fn m_content(&self) -> MPolyQMM {
        let co = self.l_coefficients();
        gcd_many(co.values())
    }

    /// Divides out the `(M1, M2)` content and the rational content, with a
    /// positive leading coefficient (largest exponent in `[L1, L2, M1, M2]`).
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let g = self.m_content();
        let co: BTreeMap<_, _> =
            self.l_coefficients().into_iter().map(|(b, p)| (b, if g.is_one() { p } else { p.div_exact(&g).unwrap() })).collect();
        let p = Self::from_l_coefficients(&co);
        let mut num_g = BigInt::zero();
        let mut den_l = BigInt::one();
        for c in p.terms.values() {
            num_g = num_integer::Integer::gcd(&num_g, c.numer());
            den_l = num_integer::Integer::lcm(&den_l, c.denom());
        }
        let lead = p.terms.iter().max_by_key(|(e, _)| [e[2], e[3], e[0], e[1]]).map(|(_, c)| c.is_negative()).unwrap();
        let mut s = BigRational::new(den_l, num_g);
        if lead {
            s = -s;
        }
        p.scale(&s)
    }

    /// Equality after removing the `(M1, M2)` content, up to sign.
    pub fn matches_up_to_m_content(&self, o: &Self) -> bool {
        self.normalized() == o.normalized()
    }
}

impl ExprTarget for CommPoly {
    fn from_int(n: &BigInt) -> Self {
        Self::constant(BigRational::from_integer(n.clone()))
    }
    fn var(name: &str) -> Option<Self> {
        ["M1", "M2", "L1", "L2"].iter().position(|v| *v == name).map(Self::var)
    }
    fn add(&self, o: &Self) -> Self {
        CommPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        CommPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        CommPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        CommPoly::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self, String> {
        match (o.terms.len(), o.terms.get(&[0; 4])) {
            (1, Some(c)) => Ok(self.scale(&c.recip())),
            _ => Err("can only divide by a nonzero constant".into()),
        }
    }
    fn pow(&self, e: i64) -> Result<Self, String> {
        if e < 0 {
            return Err("negative exponent".into());
        }
        pow_by_squaring(self, e, Self::constant(BigRational::one()))
    }
}

impl fmt::Display for CommPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<(&Exp4, &BigRational)> = self.terms.iter().collect();
        items.sort_by_key(|(e, _)| std::cmp::Reverse([e[2], e[3], e[0], e[1]]));
        let parts: Vec<(BigRational, String)> = items
            .into_iter()
            .map(|(e, c)| {
                let names = ["M1", "M2", "L1", "L2"];
                let order = [2, 3, 0, 1];
                let m: Vec<String> = order
                    .iter()
                    .filter(|&&i| e[i] > 0)
                    .map(|&i| if e[i] == 1 { names[i].to_string() } else { format!("{}^{}", names[i], e[i]) })
                    .collect();
                (c.clone(), m.join("*"))
            })
            .collect();
        write!(f, "{}", fmt_sum(&parts))
    }
}

pub fn parse_comm_poly(src: &str) -> Result<CommPoly, crate::format::ParseError> {
    crate::format::eval_expr(&crate::format::parse_expr(src)?, &Default::default())
}

/// `ε(P) = P|_{q=1}`; defined only on denominator-free operators.
pub fn epsilon_q1(p: &OreOp) -> Result<CommPoly, OreError> {
    let mut terms = Vec::new();
    for (b, c) in p.terms() {
        if !c.den().is_constant() {
            return Err(OreError::NotIntegral);
        }
        let s = c.den().constant_value().unwrap().recip();
        for (e, x) in c.num().at_q_one().terms() {
            terms.push(([e.1, e.2, b.0, b.1], x * &s));
        }
    }
    Ok(CommPoly::from_terms(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_expr;

    fn op(s: &str) -> OreOp {
        crate::format::eval_expr(&parse_expr(s).unwrap(), &Default::default()).unwrap()
    }

    #[test]
    fn commutator_vanishes() {
        let p = op("L1*M1 - q*M1*L1");
        assert!(p.is_zero() || epsilon_q1(&p).unwrap().is_zero());
        let p = op("M1*L1 - M1*L1*q");
        assert!(epsilon_q1(&p).unwrap().is_zero());
    }

    #[test]
    fn content_removal() {
        let a = parse_comm_poly("M1^2*M2*(L1 - 1)*(L2*M1 + 2)").unwrap();
        let b = parse_comm_poly("-(L1 - 1)*(L2*M1 + 2)").unwrap();
        assert!(a.matches_up_to_m_content(&b));
        let c = parse_comm_poly("(L1 + 1)*(L2*M1 + 2)").unwrap();
        assert!(!a.matches_up_to_m_content(&c));
    }

    #[test]
    fn requires_integral_form() {
        let p = op("L1/(M1 - 1)");
        assert_eq!(epsilon_q1(&p), Err(OreError::NotIntegral));
    }
}
