//! Left ideals of the q-Weyl algebra: normal forms, Buchberger's algorithm,
//! staircases, FGLM order change, the Groebner fan and relations with a
//! prescribed support.
//!
//! Everything is generic over [`CoeffField`], so the same code runs over
//! `Q(q, M1, M2)`, over `F_p(M1, M2)` and over sampled grids.

pub mod fan;
pub mod order;

use std::collections::{BTreeSet, HashMap};

use crate::ore::{CoeffField, Ore};
use order::{divides, lcm, LMono, TermOrder};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum GbError {
    #[error("a pivot coefficient is not invertible at every sample point")]
    Singular,
    #[error("the ideal is not zero-dimensional")]
    NotZeroDimensional,
    #[error("zero generator")]
    ZeroGenerator,
}

pub type Result<T> = std::result::Result<T, GbError>;

/// A reduced Groebner basis: monic generators sorted by leading monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedGb<E> {
    gens: Vec<Ore<E>>,
    order: TermOrder,
}

impl<E: Clone + PartialEq + std::fmt::Debug> ReducedGb<E> {
    pub fn gens(&self) -> &[Ore<E>] {
        &self.gens
    }

    pub fn into_gens(self) -> Vec<Ore<E>> {
        self.gens
    }

    pub fn order(&self) -> TermOrder {
        self.order
    }

    pub fn leads(&self) -> Vec<LMono> {
        self.gens.iter().map(|g| g.lead_monomial(&self.order).unwrap()).collect()
    }

    /// Wraps generators that are already a reduced basis (not checked;
    /// [`is_reduced`] and [`s_pairs_reduce_to_zero`] do that).
    pub fn from_reduced<F: CoeffField<Elem = E>>(f: &F, gens: Vec<Ore<E>>, order: TermOrder) -> Result<Self> {
        let mut gens = gens
            .into_iter()
            .map(|g| g.monic(f, &order).map_err(|_| GbError::Singular))
            .collect::<Result<Vec<_>>>()?;
        sort_by_lead(&mut gens, &order);
        Ok(Self { gens, order })
    }
}

fn sort_by_lead<E: Clone + PartialEq + std::fmt::Debug>(gens: &mut [Ore<E>], order: &TermOrder) {
    gens.sort_by(|a, b| order.cmp(a.lead_monomial(order).unwrap(), b.lead_monomial(order).unwrap()));
}

fn mono_sub(a: LMono, b: LMono) -> LMono {
    (a.0 - b.0, a.1 - b.1)
}

/// Full reduction of `p` by `gens` (each monic under `order`).
pub fn normal_form<F: CoeffField>(f: &F, p: &Ore<F::Elem>, gens: &[Ore<F::Elem>], order: &TermOrder) -> Ore<F::Elem> {
    let leads: Vec<LMono> = gens.iter().map(|g| g.lead_monomial(order).expect("nonzero generator")).collect();
    let mut p = p.clone();
    let mut rem: Vec<(LMono, F::Elem)> = Vec::new();
    while let Some((m, c)) = p.lead(order) {
        let c = c.clone();
        match leads.iter().position(|&l| divides(l, m)) {
            Some(k) => {
                let u = mono_sub(m, leads[k]);
                p = p.sub(f, &gens[k].mul_term_left(f, &c, u));
            }
            None => {
                rem.push((m, c));
                let mut t = p.into_terms();
                t.remove(&m);
                p = Ore::from_terms(f, t);
            }
        }
    }
    Ore::from_terms(f, rem)
}

/// `L^{w-a} f - L^{w-b} g` for monic `f, g` with leading monomials `a, b`
/// and `w = lcm(a, b)`.
pub fn s_poly<F: CoeffField>(f: &F, a: &Ore<F::Elem>, b: &Ore<F::Elem>, order: &TermOrder) -> Ore<F::Elem> {
    let la = a.lead_monomial(order).unwrap();
    let lb = b.lead_monomial(order).unwrap();
    let w = lcm(la, lb);
    let one = f.one();
    a.mul_term_left(f, &one, mono_sub(w, la)).sub(f, &b.mul_term_left(f, &one, mono_sub(w, lb)))
}

/// Reduced Groebner basis of the left ideal generated by `gens`.
///
/// Pairs are treated by the normal strategy (smallest lcm first, ties in
/// creation order), which makes runs reproducible.
pub fn buchberger<F: CoeffField>(f: &F, gens: &[Ore<F::Elem>], order: TermOrder) -> Result<ReducedGb<F::Elem>> {
    if gens.iter().any(|g| g.is_zero()) {
        return Err(GbError::ZeroGenerator);
    }
    let mut g: Vec<Ore<F::Elem>> = Vec::new();
    for p in gens {
        let r = normal_form(f, p, &g, &order);
        if !r.is_zero() {
            g.push(r.monic(f, &order).map_err(|_| GbError::Singular)?);
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..g.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    while !pairs.is_empty() {
        let lcm_of = |&(i, j): &(usize, usize), g: &[Ore<F::Elem>]| {
            lcm(g[i].lead_monomial(&order).unwrap(), g[j].lead_monomial(&order).unwrap())
        };
        let k = (0..pairs.len())
            .min_by(|&x, &y| order.cmp(lcm_of(&pairs[x], &g), lcm_of(&pairs[y], &g)).then(x.cmp(&y)))
            .unwrap();
        let (i, j) = pairs.remove(k);
        let s = s_poly(f, &g[i], &g[j], &order);
        let h = normal_form(f, &s, &g, &order);
        if !h.is_zero() {
            let n = g.len();
            g.push(h.monic(f, &order).map_err(|_| GbError::Singular)?);
            pairs.extend((0..n).map(|i| (i, n)));
        }
    }
    interreduce(f, g, order)
}

/// Drops generators with reducible leading monomials and tail-reduces the
/// rest.
pub fn interreduce<F: CoeffField>(f: &F, mut g: Vec<Ore<F::Elem>>, order: TermOrder) -> Result<ReducedGb<F::Elem>> {
    sort_by_lead(&mut g, &order);
    let mut keep: Vec<Ore<F::Elem>> = Vec::new();
    for p in g {
        let lp = p.lead_monomial(&order).unwrap();
        if !keep.iter().any(|k| divides(k.lead_monomial(&order).unwrap(), lp)) {
            keep.push(p);
        }
    }
    let mut out = Vec::with_capacity(keep.len());
    for k in 0..keep.len() {
        let others: Vec<Ore<F::Elem>> = keep.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| p.clone()).collect();
        let r = normal_form(f, &keep[k], &others, &order);
        out.push(r.monic(f, &order).map_err(|_| GbError::Singular)?);
    }
    sort_by_lead(&mut out, &order);
    Ok(ReducedGb { gens: out, order })
}

/// No term of a generator is divisible by the leading monomial of another,
/// and leading coefficients are 1.
pub fn is_reduced<F: CoeffField>(f: &F, gens: &[Ore<F::Elem>], order: &TermOrder) -> bool {
    let leads: Vec<LMono> = gens.iter().map(|g| g.lead_monomial(order).unwrap()).collect();
    gens.iter().enumerate().all(|(k, g)| {
        f.is_one(g.coeff(leads[k]).unwrap())
            && g.support().iter().all(|&m| leads.iter().enumerate().all(|(i, &l)| i == k || !divides(l, m)))
    })
}

/// Every S-polynomial of `gens` reduces to zero.
pub fn s_pairs_reduce_to_zero<F: CoeffField>(f: &F, gens: &[Ore<F::Elem>], order: &TermOrder) -> bool {
    (0..gens.len()).all(|j| {
        (0..j).all(|i| normal_form(f, &s_poly(f, &gens[i], &gens[j], order), gens, order).is_zero())
    })
}

/// Standard monomials of a set of leading monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Staircase {
    pub monomials: Vec<LMono>,
}

impl Staircase {
    pub fn rank(&self) -> usize {
        self.monomials.len()
    }

    /// Closed under division.
    pub fn is_order_ideal(&self) -> bool {
        let set: BTreeSet<LMono> = self.monomials.iter().copied().collect();
        self.monomials
            .iter()
            .all(|&(a, b)| (a == 0 || set.contains(&(a - 1, b))) && (b == 0 || set.contains(&(a, b - 1))))
    }
}

/// The monomials below the staircase of `leads`, sorted in ascending
/// lexicographic exponent order.
pub fn staircase_of(leads: &[LMono]) -> Result<Staircase> {
    let a = leads.iter().filter(|l| l.1 == 0).map(|l| l.0).min();
    let b = leads.iter().filter(|l| l.0 == 0).map(|l| l.1).min();
    let (Some(a), Some(b)) = (a, b) else { return Err(GbError::NotZeroDimensional) };
    let mut monomials = Vec::new();
    for i in 0..a {
        for j in 0..b {
            if !leads.iter().any(|&l| divides(l, (i, j))) {
                monomials.push((i, j));
            }
        }
    }
    Ok(Staircase { monomials })
}

pub fn staircase<E: Clone + PartialEq + std::fmt::Debug>(gb: &ReducedGb<E>) -> Result<Staircase> {
    staircase_of(&gb.leads())
}

/// Normal forms of monomials modulo a zero-dimensional basis, cached and
/// built up one shift at a time: `NF(L^m) = NF(L_i NF(L^{m - e_i}))`.
pub struct Quotient<'a, F: CoeffField> {
    f: &'a F,
    gb: &'a ReducedGb<F::Elem>,
    basis: Vec<LMono>,
    cache: HashMap<LMono, Ore<F::Elem>>,
}

impl<'a, F: CoeffField> Quotient<'a, F> {
    pub fn new(f: &'a F, gb: &'a ReducedGb<F::Elem>) -> Result<Self> {
        let basis = staircase(gb)?.monomials;
        Ok(Self { f, gb, basis, cache: HashMap::new() })
    }

    pub fn basis(&self) -> &[LMono] {
        &self.basis
    }

    pub fn nf(&self, p: &Ore<F::Elem>) -> Ore<F::Elem> {
        normal_form(self.f, p, self.gb.gens(), &self.gb.order())
    }

    pub fn nf_monomial(&mut self, m: LMono) -> Ore<F::Elem> {
        if let Some(r) = self.cache.get(&m) {
            return r.clone();
        }
        let r = if m == (0, 0) {
            self.nf(&Ore::l_monomial(self.f, (0, 0)))
        } else {
            let (prev, step) = if m.0 > 0 { ((m.0 - 1, m.1), (1, 0)) } else { ((m.0, m.1 - 1), (0, 1)) };
            let p = self.nf_monomial(prev);
            self.nf(&p.mul_term_left(self.f, &self.f.one(), step))
        };
        self.cache.insert(m, r.clone());
        r
    }

    /// Coordinates of a normal form in the standard-monomial basis.
    pub fn coordinates(&self, p: &Ore<F::Elem>) -> Vec<F::Elem> {
        self.basis.iter().map(|b| p.coeff(*b).cloned().unwrap_or_else(|| self.f.zero())).collect()
    }
}

/// Incremental linear independence test over a coefficient field, tracking
/// how each reduced row combines the original vectors.
struct Dependence<'a, F: CoeffField> {
    f: &'a F,
    rows: Vec<(usize, Vec<F::Elem>, Vec<F::Elem>)>,
    count: usize,
}

impl<'a, F: CoeffField> Dependence<'a, F> {
    fn new(f: &'a F) -> Self {
        Self { f, rows: Vec::new(), count: 0 }
    }

    /// Either records `v` as independent (`Ok(None)`) or returns `λ` with
    /// `v = Σ λ_k v_k` over the vectors recorded so far.
    fn insert(&mut self, v: Vec<F::Elem>) -> Result<Option<Vec<F::Elem>>> {
        let f = self.f;
        let mut w = v;
        let mut comb: Vec<F::Elem> = vec![f.zero(); self.count];
        for (p, vec, combo) in &self.rows {
            let c = w[*p].clone();
            if f.is_zero(&c) {
                continue;
            }
            for (x, y) in w.iter_mut().zip(vec) {
                *x = f.sub(x, &f.mul(&c, y));
            }
            for (x, y) in comb.iter_mut().zip(combo) {
                *x = f.add(x, &f.mul(&c, y));
            }
        }
        let Some(p) = w.iter().position(|x| !f.is_zero(x)) else { return Ok(Some(comb)) };
        let inv = f.inv(&w[p]).ok_or(GbError::Singular)?;
        let vec: Vec<F::Elem> = w.iter().map(|x| f.mul(x, &inv)).collect();
        // new row = (v - Σ comb_k v_k) / w_p
        let mut combo: Vec<F::Elem> = comb.iter().map(|x| f.neg(&f.mul(x, &inv))).collect();
        combo.push(inv);
        for r in self.rows.iter_mut() {
            r.2.push(f.zero());
        }
        self.rows.push((p, vec, combo));
        self.count += 1;
        Ok(None)
    }
}

/// Order change for a zero-dimensional ideal.
pub fn fglm<F: CoeffField>(f: &F, gb: &ReducedGb<F::Elem>, to: TermOrder) -> Result<ReducedGb<F::Elem>> {
    let mut q = Quotient::new(f, gb)?;
    let mut dep = Dependence::new(f);
    let mut stair: Vec<LMono> = Vec::new();
    let mut new_gens: Vec<Ore<F::Elem>> = Vec::new();
    let mut new_leads: Vec<LMono> = Vec::new();
    let mut candidates: BTreeSet<(u32, u32)> = BTreeSet::new();
    candidates.insert((0, 0));
    loop {
        let Some(m) = candidates.iter().copied().min_by(|a, b| to.cmp(*a, *b)) else { break };
        candidates.remove(&m);
        if new_leads.iter().any(|&l| divides(l, m)) {
            continue;
        }
        let nf = q.nf_monomial(m);
        match dep.insert(q.coordinates(&nf))? {
            Some(lambda) => {
                let mut terms = vec![(m, f.one())];
                for (s, c) in stair.iter().zip(lambda) {
                    terms.push((*s, f.neg(&c)));
                }
                new_gens.push(Ore::from_terms(f, terms));
                new_leads.push(m);
            }
            None => {
                stair.push(m);
                candidates.insert((m.0 + 1, m.1));
                candidates.insert((m.0, m.1 + 1));
            }
        }
    }
    sort_by_lead(&mut new_gens, &to);
    Ok(ReducedGb { gens: new_gens, order: to })
}

/// A nonzero element of the ideal supported on `support`, or `None`.
///
/// The monomials are taken in the given order; the first one whose normal
/// form depends on those of its predecessors yields the relation, monic in
/// that monomial.
pub fn support_relation<F: CoeffField>(
    f: &F,
    gb: &ReducedGb<F::Elem>,
    support: &[LMono],
) -> Result<Option<Ore<F::Elem>>> {
    let mut q = Quotient::new(f, gb)?;
    let mut dep = Dependence::new(f);
    let mut seen: Vec<LMono> = Vec::new();
    for &m in support {
        let nf = q.nf_monomial(m);
        if let Some(lambda) = dep.insert(q.coordinates(&nf))? {
            let mut terms = vec![(m, f.one())];
            for (s, c) in seen.iter().zip(lambda) {
                terms.push((*s, f.neg(&c)));
            }
            return Ok(Some(Ore::from_terms(f, terms)));
        }
        seen.push(m);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_operator;
    use crate::ore::{ExactField, OreOp};

    fn op(s: &str) -> OreOp {
        parse_operator(s).unwrap()
    }

    #[test]
    fn trivial_ideal() {
        let f = ExactField;
        let g = buchberger(&f, &[op("L1 - 1"), op("L2 - 1")], TermOrder::deglex()).unwrap();
        assert_eq!(g.gens(), &[op("L2 - 1"), op("L1 - 1")]);
        assert_eq!(staircase(&g).unwrap().monomials, vec![(0, 0)]);
        let r = support_relation(&f, &g, &[(0, 0), (1, 0)]).unwrap().unwrap();
        assert_eq!(r, op("L1 - 1"));
    }

    #[test]
    fn buchberger_on_a_commuting_pair() {
        // L1 - M2 and L2 - M1 : S-pair forces a consistency condition
        let f = ExactField;
        let g = buchberger(&f, &[op("L1 - 2"), op("L2^2 - q*M1"), op("L1*L2 - 3")], TermOrder::deglex()).unwrap();
        // L1 L2 - 3 reduces to 2 L2 - 3, so L2 = 3/2 and then q M1 = 9/4: the ideal is the unit ideal
        assert_eq!(g.gens(), &[op("1")]);
    }

    #[test]
    fn fglm_of_q_shifts() {
        let f = ExactField;
        let gens = [op("L1 - q*M1"), op("L2^2 - M2*L2 - 1")];
        let g = buchberger(&f, &gens, TermOrder::deglex()).unwrap();
        assert!(s_pairs_reduce_to_zero(&f, g.gens(), &g.order()));
        assert!(is_reduced(&f, g.gens(), &g.order()));
        let lex = fglm(&f, &g, TermOrder::lex()).unwrap();
        for p in g.gens() {
            assert!(normal_form(&f, p, lex.gens(), &lex.order()).is_zero());
        }
        for p in lex.gens() {
            assert!(normal_form(&f, p, g.gens(), &g.order()).is_zero());
        }
        assert_eq!(staircase(&lex).unwrap().rank(), 2);
        assert_eq!(fglm(&f, &g, TermOrder::deglex()).unwrap(), g);
    }
}
