//! Reconstruction of exact rational functions in `(q, M1, M2)` from modular
//! images.
//!
//! Three layers. A vector of univariate rational functions sharing a
//! denominator is recovered from samples by reconstructing one random
//! combination (which exposes the common denominator) and interpolating
//! the cleared numerators. A bivariate function sampled on a grid is
//! recovered row by row in `M1`, then the row coefficients are recovered
//! as a vector in `M2`. The dependence on `q` is recovered the same way
//! across many specializations `q = q0`, and the integer coefficients by
//! Chinese remaindering and rational number reconstruction.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::arith::bipoly::BiPoly;
use crate::arith::modp::{crt_combine, rational_reconstruct as rat_recon_int, PrimeField};
use crate::arith::mpoly::{Exp3, MPolyQMM};
use crate::arith::ratfunc::RatFuncQMM;
use crate::arith::upoly::{self, Newton};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ReconError {
    #[error("not enough samples to determine the function")]
    NeedMore,
    #[error("too many unlucky samples ({0})")]
    Unlucky(String),
    #[error("rational number reconstruction failed after {0} primes")]
    Integers(usize),
}

pub type Result<T> = std::result::Result<T, ReconError>;

/// Samples not used to fit the answer; they certify it.
pub const DEFAULT_SLACK: usize = 3;

/// Common denominator (monic) and numerators of a vector of univariate
/// rational functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorRecon {
    pub den: Vec<u64>,
    pub nums: Vec<Vec<u64>>,
}

/// Recovers `v(x) = (n_1, ..., n_k) / d` from `vals[s] = v(xs[s])`.
pub fn reconstruct_vector(
    fp: &PrimeField,
    xs: &[u64],
    vals: &[Vec<u64>],
    slack: usize,
    rng: &mut impl Rng,
) -> Result<VectorRecon> {
    assert_eq!(xs.len(), vals.len());
    let k = vals.first().map_or(0, |v| v.len());
    let npts = xs.len();
    let rho: Vec<u64> = (0..k).map(|_| rng.gen_range(1..fp.p())).collect();
    let mut nw = Newton::new();
    for (x, v) in xs.iter().zip(vals) {
        let s = v.iter().zip(&rho).fold(0, |acc, (&a, &r)| fp.mul_add(acc, a, r));
        nw.push(fp, *x, s);
    }
    let (_, den) = upoly::rational_reconstruct_mq(fp, nw.poly(), nw.modulus(), slack).ok_or(ReconError::NeedMore)?;
    let dvals: Vec<u64> = xs.iter().map(|&x| upoly::eval(fp, &den, x)).collect();
    if dvals.iter().any(|&d| d == 0) {
        return Err(ReconError::Unlucky("denominator vanishes at a sample".into()));
    }
    let mut nums = Vec::with_capacity(k);
    for c in 0..k {
        let mut nw = Newton::new();
        for s in 0..npts {
            nw.push(fp, xs[s], fp.mul(vals[s][c], dvals[s]));
        }
        let p = nw.poly().to_vec();
        if p.len() + slack > npts {
            return Err(ReconError::NeedMore);
        }
        nums.push(p);
    }
    Ok(VectorRecon { den, nums })
}

/// Scales `(num, den)` so that the coefficient of the highest `M2` power
/// in the highest `M1` row of `den` is 1.
pub fn normalize_pair(fp: &PrimeField, num: &BiPoly, den: &BiPoly) -> Option<(BiPoly, BiPoly)> {
    let lc = *den.rows().last()?.last()?;
    let inv = fp.inv(lc)?;
    Some((num.scale(fp, inv), den.scale(fp, inv)))
}

/// Recovers `f = num/den` in `F_p(x, y)` from `grid[j][i] = f(xs[i], ys[j])`.
/// The output is normalized as in [`normalize_pair`].
pub fn reconstruct_bivariate(
    fp: &PrimeField,
    xs: &[u64],
    ys: &[u64],
    grid: &[Vec<u64>],
    slack: usize,
    rng: &mut impl Rng,
) -> Result<(BiPoly, BiPoly)> {
    assert_eq!(grid.len(), ys.len());
    if grid.iter().all(|r| r.iter().all(|&v| v == 0)) {
        return Ok((BiPoly::zero(), BiPoly::constant(1)));
    }
    let mut rows = Vec::with_capacity(ys.len());
    let mut failed = 0;
    for row in grid {
        let mut nw = Newton::new();
        for (x, &v) in xs.iter().zip(row) {
            nw.push(fp, *x, v);
        }
        match upoly::rational_reconstruct_mq(fp, nw.poly(), nw.modulus(), slack) {
            Some(nd) => rows.push(Some(nd)),
            None => {
                failed += 1;
                rows.push(None)
            }
        }
    }
    if failed * 4 > ys.len() {
        return Err(ReconError::NeedMore);
    }
    let dn = rows.iter().flatten().map(|(n, _)| n.len()).max().unwrap_or(0);
    let dd = rows.iter().flatten().map(|(_, d)| d.len()).max().unwrap_or(1);
    let mut kept_y = Vec::new();
    let mut kept = Vec::new();
    for (y, r) in ys.iter().zip(rows) {
        let Some((n, d)) = r else { continue };
        if n.len() != dn || d.len() != dd {
            continue;
        }
        let mut v = n;
        v.extend_from_slice(&d[..dd - 1]);
        kept_y.push(*y);
        kept.push(v);
    }
    if kept.len() + 2 < ys.len() * 3 / 4 {
        return Err(ReconError::Unlucky(format!("{} of {} rows have generic degrees", kept.len(), ys.len())));
    }
    let vr = reconstruct_vector(fp, &kept_y, &kept, slack, rng)?;
    let num = BiPoly::from_rows(vr.nums[..dn].to_vec());
    let mut drows = vr.nums[dn..].to_vec();
    drows.push(vr.den);
    let den = BiPoly::from_rows(drows);
    normalize_pair(fp, &num, &den).ok_or(ReconError::NeedMore)
}

/// A normalized bivariate image at one specialization `q = q0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSample {
    pub q0: u64,
    pub num: BiPoly,
    pub den: BiPoly,
}

fn shape(p: &BiPoly) -> Vec<usize> {
    p.rows().iter().map(|r| r.len()).collect()
}

/// Polynomials in `(q, M1, M2)` over `F_p`, keyed by exponent.
pub type ModPoly = BTreeMap<Exp3, u64>;

/// Recovers `num/den` in `F_p(q)(M1, M2)` from normalized images at many
/// `q0`. Samples whose `(M1, M2)`-shape is not the generic one are dropped.
pub fn reconstruct_q(fp: &PrimeField, samples: &[QSample], slack: usize, rng: &mut impl Rng) -> Result<(ModPoly, ModPoly)> {
    // generic shape: the most frequent among those with the largest size
    let mut counts: BTreeMap<(Vec<usize>, Vec<usize>), usize> = BTreeMap::new();
    for s in samples {
        *counts.entry((shape(&s.num), shape(&s.den))).or_default() += 1;
    }
    let size = |k: &(Vec<usize>, Vec<usize>)| k.0.iter().sum::<usize>() + k.1.iter().sum::<usize>();
    let (gshape, _) = counts
        .iter()
        .max_by_key(|(k, c)| (size(k), **c))
        .ok_or(ReconError::NeedMore)?;
    let (sn, sd) = gshape.clone();
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for s in samples {
        if shape(&s.num) != sn || shape(&s.den) != sd {
            continue;
        }
        let mut v = Vec::new();
        for r in s.num.rows().iter().chain(s.den.rows()) {
            v.extend_from_slice(r);
        }
        xs.push(s.q0);
        vals.push(v);
    }
    if xs.len() * 5 < samples.len() * 4 {
        return Err(ReconError::Unlucky(format!("{} of {} samples have the generic shape", xs.len(), samples.len())));
    }
    let vr = reconstruct_vector(fp, &xs, &vals, slack, rng)?;
    let mut it = vr.nums.into_iter();
    let mut unflatten = |sh: &[usize]| {
        let mut out = ModPoly::new();
        for (i, &len) in sh.iter().enumerate() {
            for j in 0..len {
                let poly = it.next().expect("flattened length");
                for (e, &c) in poly.iter().enumerate() {
                    if c != 0 {
                        out.insert((e as u32, i as u32, j as u32), c);
                    }
                }
            }
        }
        out
    };
    let num = unflatten(&sn);
    let den = unflatten(&sd);
    Ok((num, den))
}

/// Residues of one polynomial over several primes.
#[derive(Clone, Debug, Default)]
pub struct MultiModular {
    modulus: BigInt,
    values: BTreeMap<Exp3, BigInt>,
    primes: usize,
}

impl MultiModular {
    pub fn new() -> Self {
        Self { modulus: BigInt::from(1), values: BTreeMap::new(), primes: 0 }
    }

    pub fn primes(&self) -> usize {
        self.primes
    }

    /// Adds an image modulo a further prime. Exponents absent on one side
    /// are zero there.
    pub fn add_image(&mut self, fp: &PrimeField, img: &ModPoly) {
        let keys: Vec<Exp3> = self.values.keys().chain(img.keys()).copied().collect();
        for k in keys {
            let a = self.values.get(&k).cloned().unwrap_or_default();
            let b = img.get(&k).copied().unwrap_or(0);
            let c = crt_combine(&a, &self.modulus, b, fp);
            self.values.insert(k, c);
        }
        self.modulus *= BigInt::from(fp.p());
        self.primes += 1;
    }

    /// Rational number reconstruction of every coefficient.
    pub fn lift(&self) -> Option<MPolyQMM> {
        let mut terms: Vec<(Exp3, BigRational)> = Vec::with_capacity(self.values.len());
        for (e, v) in &self.values {
            let r = rat_recon_int(v, &self.modulus)?;
            terms.push((*e, r));
        }
        Some(MPolyQMM::from_terms(terms))
    }
}

/// The image of an exact function at `q = q0`, normalized for comparison
/// with [`QSample`]s. `None` if the specialization is undefined.
pub fn exact_image(fp: &PrimeField, f: &RatFuncQMM, q0: u64) -> Option<(BiPoly, BiPoly)> {
    let m = f.to_mod(q0, fp).ok()?;
    normalize_pair(fp, &m.num, &m.den)
}

/// Drives the `q`-level reconstruction of several functions at once.
///
/// `sample(fp, rng)` returns `(q0, images)` for a fresh specialization of its
/// choice, one normalized image per function, or `None` when it hit an
/// unlucky point. New samples are requested in batches until every
/// function reconstructs; the integer coefficients are then lifted and the
/// candidate is checked against a sample taken modulo a different prime.
pub fn reconstruct_functions<S, R>(
    nfuncs: usize,
    primes: &[u64],
    slack: usize,
    max_samples: usize,
    mut sample: S,
    rng: &mut R,
) -> Result<Vec<RatFuncQMM>>
where
    S: FnMut(&PrimeField, &mut R) -> Option<(u64, Vec<(BiPoly, BiPoly)>)>,
    R: Rng,
{
    let mut acc: Vec<(MultiModular, MultiModular)> = vec![(MultiModular::new(), MultiModular::new()); nfuncs];
    for (pi, &p) in primes.iter().enumerate() {
        let fp = PrimeField::new(p).expect("prime list");
        let images = reconstruct_one_prime(&fp, nfuncs, slack, max_samples, &mut sample, rng)?;
        for (a, (n, d)) in acc.iter_mut().zip(&images) {
            a.0.add_image(&fp, n);
            a.1.add_image(&fp, d);
        }
        let Some(cands) = lift_all(&acc) else { continue };
        // check against a different prime
        let Some(&vp) = primes.get(pi + 1) else { return Ok(cands) };
        let vfp = PrimeField::new(vp).expect("prime list");
        for _ in 0..8 {
            let Some((q0, imgs)) = sample(&vfp, rng) else { continue };
            let ok = cands
                .iter()
                .zip(&imgs)
                .all(|(c, (n, d))| exact_image(&vfp, c, q0).map_or(false, |(cn, cd)| &cn == n && &cd == d));
            if ok {
                return Ok(cands);
            }
            break;
        }
    }
    Err(ReconError::Integers(primes.len()))
}

fn lift_all(acc: &[(MultiModular, MultiModular)]) -> Option<Vec<RatFuncQMM>> {
    acc.iter()
        .map(|(n, d)| RatFuncQMM::canonical(n.lift()?, d.lift()?).ok())
        .collect()
}

fn reconstruct_one_prime<S, R>(
    fp: &PrimeField,
    nfuncs: usize,
    slack: usize,
    max_samples: usize,
    sample: &mut S,
    rng: &mut R,
) -> Result<Vec<(ModPoly, ModPoly)>>
where
    S: FnMut(&PrimeField, &mut R) -> Option<(u64, Vec<(BiPoly, BiPoly)>)>,
    R: Rng,
{
    let mut samples: Vec<Vec<QSample>> = vec![Vec::new(); nfuncs];
    let mut seen = std::collections::HashSet::new();
    let mut done: Vec<Option<(ModPoly, ModPoly)>> = vec![None; nfuncs];
    let mut misses = 0;
    let mut batch = 8;
    while done.iter().any(|d| d.is_none()) {
        let mut got = 0;
        while got < batch {
            if seen.len() >= max_samples {
                return Err(ReconError::NeedMore);
            }
            match sample(fp, rng) {
                Some((q0, imgs)) if seen.insert(q0) => {
                    assert_eq!(imgs.len(), nfuncs, "sampler returned the wrong number of images");
                    for (s, (num, den)) in samples.iter_mut().zip(imgs) {
                        s.push(QSample { q0, num, den });
                    }
                    got += 1;
                }
                _ => {
                    misses += 1;
                    if misses > 50 + seen.len() {
                        return Err(ReconError::Unlucky("sampler keeps failing".into()));
                    }
                }
            }
        }
        for (f, d) in done.iter_mut().enumerate() {
            if d.is_none() {
                match reconstruct_q(fp, &samples[f], slack, rng) {
                    Ok(r) => *d = Some(r),
                    Err(ReconError::NeedMore) | Err(ReconError::Unlucky(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        batch = (seen.len() / 4).max(8);
    }
    Ok(done.into_iter().map(|d| d.unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_ratfunc;
    use rand::SeedableRng;

    #[test]
    fn vector_with_common_denominator() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let den = vec![5, 0, 1]; // x^2 + 5
        let nums = [vec![1, 2, 3], vec![0, 0, 0, 7], vec![4]];
        let xs: Vec<u64> = (1..20).collect();
        let vals: Vec<Vec<u64>> = xs
            .iter()
            .map(|&x| {
                let di = fp.inv(upoly::eval(&fp, &den, x)).unwrap();
                nums.iter().map(|n| fp.mul(upoly::eval(&fp, n, x), di)).collect()
            })
            .collect();
        let r = reconstruct_vector(&fp, &xs, &vals, 3, &mut rng).unwrap();
        assert_eq!(r.den, den);
        assert_eq!(r.nums, nums.to_vec());
    }

    fn grid_of(fp: &PrimeField, f: &RatFuncQMM, q0: u64, xs: &[u64], ys: &[u64]) -> Vec<Vec<u64>> {
        ys.iter().map(|&y| xs.iter().map(|&x| f.eval_mod(q0, x, y, fp).unwrap()).collect()).collect()
    }

    #[test]
    fn bivariate_grid_reconstruction() {
        let fp = PrimeField::default_field();
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let f = parse_ratfunc("(q*M1^3*M2 - 2*M2^2 + 7)/((q^2*M1*M2 - 1)*(M1 - 3*M2))").unwrap();
        let (q0, a, b) = (64u64, 12345u64, 678u64);
        let xs: Vec<u64> = (0..14).map(|i| fp.mul(a, fp.pow(q0, i))).collect();
        let ys: Vec<u64> = (0..14).map(|j| fp.mul(b, fp.pow(q0, j))).collect();
        let (n, d) = reconstruct_bivariate(&fp, &xs, &ys, &grid_of(&fp, &f, q0, &xs, &ys), 3, &mut rng).unwrap();
        assert_eq!(Some((n, d)), exact_image(&fp, &f, q0));
    }

    #[test]
    fn full_reconstruction_from_grids() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let targets = vec![
            parse_ratfunc("(q^3*M1 - 1)*(q*M2 + 2)/(q^5*M1^2*M2 - 3)").unwrap(),
            parse_ratfunc("-5/7*q^2*M1*M2^2 + 1/3").unwrap(),
        ];
        let w = 10;
        let sampler = |fp: &PrimeField, rng: &mut rand::rngs::StdRng| {
            let q0 = rng.gen_range(2..fp.p() - 1);
            let (a, b) = (rng.gen_range(1..fp.p()), rng.gen_range(1..fp.p()));
            let xs: Vec<u64> = (0..w).map(|i| fp.mul(a, fp.pow(q0, i))).collect();
            let ys: Vec<u64> = (0..w).map(|j| fp.mul(b, fp.pow(q0, j))).collect();
            let mut out = Vec::new();
            for t in &targets {
                let g: Option<Vec<Vec<u64>>> = ys
                    .iter()
                    .map(|&y| xs.iter().map(|&x| t.eval_mod(q0, x, y, fp).ok()).collect())
                    .collect();
                let mut r = rand::rngs::StdRng::seed_from_u64(q0);
                out.push(reconstruct_bivariate(fp, &xs, &ys, &g?, 3, &mut r).ok()?);
            }
            Some((q0, out))
        };
        let primes = [2147483647, 2147483629, 2147483587];
        let got = reconstruct_functions(2, &primes, 3, 200, sampler, &mut rng).unwrap();
        assert_eq!(got, targets);
    }
}
