//! Greatest common divisors of polynomials in `Z[q, M1, M2]`.
//!
//! Modular algorithm: images modulo word-size primes are computed by
//! evaluating `q`, taking bivariate gcds, and interpolating; the images are
//! combined by Chinese remaindering and rational reconstruction, and the
//! candidate is confirmed by trial division over `Q`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::bipoly::BiPoly;
use super::modp::{crt_combine, primes_below_2_31, rational_reconstruct, PrimeField};
use super::mpoly::{pack, unpack, Exp3, MPolyQMM};
use super::upoly;

/// Polynomial over `F_p` stored as `(M1, M2)`-monomial -> coefficient in `F_p[q]`.
type TriMod = BTreeMap<(u32, u32), Vec<u64>>;

/// Primitive gcd with positive leading coefficient; `gcd(0, 0) = 0`.
pub fn gcd(a: &MPolyQMM, b: &MPolyQMM) -> MPolyQMM {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    let a = a.primitive();
    let b = b.primitive();
    let (ma, mb) = (a.min_exponents(), b.min_exponents());
    let mono: Exp3 = (ma.0.min(mb.0), ma.1.min(mb.1), ma.2.min(mb.2));
    let mono_poly = MPolyQMM::monomial(BigRational::from_integer(1.into()), mono);
    let a = a.div_monomial(ma);
    let b = b.div_monomial(mb);
    if a.is_constant() || b.is_constant() {
        return mono_poly;
    }
    if a == b {
        return a.mul(&mono_poly);
    }
    let (small, big) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if big.div_exact(small).is_some() {
        return small.mul(&mono_poly);
    }
    let g = modular_gcd(&a, &b);
    g.mul(&mono_poly)
}

/// Gcd of a list, stopping early once it reaches 1.
pub fn gcd_many<'a>(polys: impl IntoIterator<Item = &'a MPolyQMM>) -> MPolyQMM {
    let mut g = MPolyQMM::zero();
    for p in polys {
        g = gcd(&g, p);
        if g.is_one() {
            break;
        }
    }
    g
}

fn modular_gcd(a: &MPolyQMM, b: &MPolyQMM) -> MPolyQMM {
    let lead_a = a.lead().unwrap().1.to_integer();
    let lead_b = b.lead().unwrap().1.to_integer();
    let mut best: Option<Exp3> = None;
    let mut residues: BTreeMap<u64, BigInt> = BTreeMap::new();
    let mut modulus = BigInt::from(1);
    let mut last: Option<MPolyQMM> = None;
    for p in primes_below_2_31() {
        let fp = PrimeField::new(p).unwrap();
        if fp.from_bigint(&lead_a) == 0 || fp.from_bigint(&lead_b) == 0 {
            continue;
        }
        let img = match gcd_mod_p(a, b, &fp) {
            Some(img) => img,
            None => continue,
        };
        let lead = unpack(*img.keys().next_back().unwrap());
        if lead == (0, 0, 0) {
            return MPolyQMM::one();
        }
        match best {
            Some(bl) if lead > bl => continue,
            Some(bl) if lead < bl => {
                residues.clear();
                modulus = BigInt::from(1);
                last = None;
            }
            _ => {}
        }
        best = Some(lead);
        // combine, treating missing monomials as zero
        let keys: Vec<u64> = residues.keys().chain(img.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let mut next = BTreeMap::new();
        for k in keys {
            let r = residues.get(&k).cloned().unwrap_or_else(BigInt::zero);
            let v = img.get(&k).copied().unwrap_or(0);
            next.insert(k, crt_combine(&r, &modulus, v, &fp));
        }
        residues = next;
        modulus *= BigInt::from(p);
        let cand: Option<Vec<(Exp3, BigRational)>> =
            residues.iter().map(|(k, r)| rational_reconstruct(r, &modulus).map(|c| (unpack(*k), c))).collect();
        let cand = match cand {
            Some(c) => MPolyQMM::from_terms(c).primitive(),
            None => continue,
        };
        if last.as_ref() == Some(&cand) && a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
            return cand;
        }
        last = Some(cand);
    }
    unreachable!("ran out of primes in gcd")
}

fn to_trimod(a: &MPolyQMM, fp: &PrimeField) -> TriMod {
    let mut t: TriMod = BTreeMap::new();
    for (e, c) in a.terms() {
        let c = fp.from_rational(c).expect("integral input");
        let v = t.entry((e.1, e.2)).or_default();
        if v.len() <= e.0 as usize {
            v.resize(e.0 as usize + 1, 0);
        }
        v[e.0 as usize] = c;
    }
    t.retain(|_, v| {
        upoly::trim(v);
        !v.is_empty()
    });
    t
}

fn q_content(t: &TriMod, fp: &PrimeField) -> Vec<u64> {
    let mut g: Vec<u64> = Vec::new();
    for v in t.values() {
        g = upoly::gcd(fp, &g, v);
        if g.len() == 1 {
            break;
        }
    }
    g
}

fn div_q(t: &TriMod, c: &[u64], fp: &PrimeField) -> TriMod {
    if c.len() == 1 {
        let inv = fp.inv(c[0]).unwrap();
        return t.iter().map(|(k, v)| (*k, upoly::scale(fp, v, inv))).collect();
    }
    t.iter().map(|(k, v)| (*k, upoly::div_exact(fp, v, c).expect("q-content division"))).collect()
}

fn eval_q(t: &TriMod, alpha: u64, fp: &PrimeField) -> BiPoly {
    BiPoly::from_terms(fp, t.iter().map(|(&(i, j), v)| (i as usize, j as usize, upoly::eval(fp, v, alpha))))
}

fn deg_q(t: &TriMod) -> usize {
    t.values().map(|v| v.len() - 1).max().unwrap_or(0)
}

/// Gcd modulo `p`, monic in the lex(q > M1 > M2) leading term, keyed by
/// packed exponent. `None` if the prime turned out unusable.
fn gcd_mod_p(a: &MPolyQMM, b: &MPolyQMM, fp: &PrimeField) -> Option<BTreeMap<u64, u64>> {
    let ta = to_trimod(a, fp);
    let tb = to_trimod(b, fp);
    let ca = q_content(&ta, fp);
    let cb = q_content(&tb, fp);
    let c = upoly::gcd(fp, &ca, &cb);
    let ta = div_q(&ta, &ca, fp);
    let tb = div_q(&tb, &cb, fp);
    let la = ta.values().next_back()?.clone();
    let lb = tb.values().next_back()?.clone();
    let gamma = upoly::gcd(fp, &la, &lb);
    let bound = gamma.len() - 1 + deg_q(&ta).min(deg_q(&tb));
    let mut images: Vec<(u64, BiPoly)> = Vec::new();
    let mut lead: Option<(usize, usize)> = None;
    let mut alpha = 0u64;
    let mut resets = 0;
    let h: TriMod = loop {
        alpha += 1;
        if alpha >= fp.p() || resets > 20 {
            return None;
        }
        let (va, vb) = (upoly::eval(fp, &la, alpha), upoly::eval(fp, &lb, alpha));
        if va == 0 || vb == 0 {
            continue;
        }
        let g = eval_q(&ta, alpha, fp).gcd(fp, &eval_q(&tb, alpha, fp));
        let gl = g.lead_exponent().unwrap();
        if gl == (0, 0) {
            let mut out = BTreeMap::new();
            let lc_inv = fp.inv(*c.last().unwrap()).unwrap();
            for (k, &x) in c.iter().enumerate() {
                if x != 0 {
                    out.insert(pack((k as u32, 0, 0)), fp.mul(x, lc_inv));
                }
            }
            return Some(out);
        }
        match lead {
            Some(l) if gl > l => continue,
            Some(l) if gl < l => images.clear(),
            _ => {}
        }
        lead = Some(gl);
        images.push((alpha, g.scale(fp, upoly::eval(fp, &gamma, alpha))));
        if images.len() > bound {
            let h = interpolate(&images, fp);
            let hc = q_content(&h, fp);
            let h = div_q(&h, &hc, fp);
            // spot check divisibility at a fresh value of q
            let beta = fp.p() - alpha;
            let hb = eval_q(&h, beta, fp);
            let ok = upoly::eval(fp, &la, beta) != 0
                && upoly::eval(fp, &lb, beta) != 0
                && !hb.is_zero()
                && eval_q(&ta, beta, fp).div_exact(fp, &hb).is_some()
                && eval_q(&tb, beta, fp).div_exact(fp, &hb).is_some();
            if ok {
                break h;
            }
            images.clear();
            lead = None;
            resets += 1;
        }
    };
    // multiply back the q-content gcd and normalize
    let mut out: BTreeMap<u64, u64> = BTreeMap::new();
    for (&(i, j), v) in &h {
        let w = upoly::mul(fp, v, &c);
        for (k, &x) in w.iter().enumerate() {
            if x != 0 {
                out.insert(pack((k as u32, i, j)), x);
            }
        }
    }
    let lc = *out.values().next_back()?;
    let inv = fp.inv(lc).unwrap();
    for x in out.values_mut() {
        *x = fp.mul(*x, inv);
    }
    Some(out)
}

fn interpolate(images: &[(u64, BiPoly)], fp: &PrimeField) -> TriMod {
    let mut keys = std::collections::BTreeSet::new();
    for (_, g) in images {
        for (i, j, _) in g.terms() {
            keys.insert((i as u32, j as u32));
        }
    }
    let mut out = TriMod::new();
    for (i, j) in keys {
        let mut nw = upoly::Newton::new();
        for (x, g) in images {
            nw.push(fp, *x, g.coeff(i as usize, j as usize));
        }
        let v = nw.poly().to_vec();
        if !v.is_empty() {
            out.insert((i, j), v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((u32, u32, u32), i64)]) -> MPolyQMM {
        MPolyQMM::from_terms(terms.iter().map(|&(e, c)| (e, BigRational::from_integer(c.into()))))
    }

    #[test]
    fn gcd_of_products() {
        let f1 = p(&[((3, 1, 0), 1), ((0, 0, 0), -1)]);
        let f2 = p(&[((1, 0, 1), 2), ((0, 1, 1), 1), ((2, 0, 0), -3)]);
        let f3 = p(&[((1, 1, 1), 1), ((0, 0, 2), 5), ((1, 0, 0), 1)]);
        let f4 = p(&[((0, 2, 0), 1), ((4, 0, 0), -7), ((0, 0, 1), 1)]);
        let g = f1.mul(&f2);
        let a = g.mul(&f3).scale(&BigRational::from_integer(6.into()));
        let b = g.mul(&f4).mul(&MPolyQMM::m1());
        assert_eq!(gcd(&a, &b), g.primitive());
        assert!(gcd(&f3, &f4).is_one());
        // q-only content
        let qc = p(&[((2, 0, 0), 1), ((0, 0, 0), 1)]);
        assert_eq!(gcd(&qc.mul(&f3), &qc.mul(&f4)), qc);
        // monomial content
        let m = p(&[((1, 2, 0), 1)]);
        assert_eq!(gcd(&m.mul(&f3), &p(&[((2, 1, 3), 4)])), p(&[((1, 1, 0), 1)]));
    }
}
