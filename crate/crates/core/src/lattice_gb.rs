//! Groebner computations for operators too large to handle over `Q(q, M)`
//! directly.
//!
//! The exact operators are imaged into a [`LatticeField`] at random
//! `(p, q0, alpha, beta)` and the computation runs there; the coefficients
//! of the resulting (monic) operators are then recovered exactly by
//! reconstructing each one in `M` from its grid values, in `q` across
//! specializations, and in `Z` across primes.

use std::cell::Cell;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::arith::bipoly::BiPoly;
use crate::arith::modp::{primes_below_2_31, PrimeField};
use crate::groebner::order::{LMono, TermOrder};
use crate::groebner::GbError;
use crate::ore::lattice::{LatticeElem, LatticeField};
use crate::ore::{CoeffField, ExactField, Ore, OreError, OreOp};
use crate::recon::{self, ReconError};

pub type LatticeOp = Ore<LatticeElem>;

#[derive(thiserror::Error, Debug)]
pub enum LatticeError {
    #[error("operator is undefined at the chosen grid")]
    Undefined,
    #[error(transparent)]
    Gb(#[from] GbError),
    #[error(transparent)]
    Ore(#[from] OreError),
    #[error(transparent)]
    Recon(#[from] ReconError),
}

pub type Result<T> = std::result::Result<T, LatticeError>;

/// A random grid of side `w` modulo `fp`. With `symmetric`, `alpha = beta`
/// so that the swap `M1 <-> M2` is available.
pub fn random_lattice(fp: &PrimeField, rng: &mut impl Rng, w: usize, symmetric: bool) -> LatticeField {
    loop {
        let q0 = rng.gen_range(2..fp.p() - 1);
        if fp.order(q0) <= 8 * w as u64 {
            continue;
        }
        let alpha = rng.gen_range(2..fp.p() - 1);
        let beta = if symmetric { alpha } else { rng.gen_range(2..fp.p() - 1) };
        return LatticeField::new(fp.clone(), q0, alpha, beta, w, w);
    }
}

/// Image of an exact operator.
pub fn image(lf: &LatticeField, op: &OreOp) -> Result<LatticeOp> {
    op.try_map(lf, |c| lf.image(c).ok_or(LatticeError::Undefined))
}

pub fn images(lf: &LatticeField, ops: &[OreOp]) -> Result<Vec<LatticeOp>> {
    ops.iter().map(|p| image(lf, p)).collect()
}

/// Image of the monic form of an exact operator.
pub fn monic_image(lf: &LatticeField, op: &OreOp, order: &TermOrder) -> Result<LatticeOp> {
    Ok(image(lf, op)?.monic(lf, order)?)
}

/// Smallest window among the coefficients.
pub fn min_window(p: &LatticeOp) -> usize {
    p.terms().values().filter_map(|c| c.window()).map(|(a, b)| a.min(b)).min().unwrap_or(usize::MAX)
}

/// Settings of [`reconstruct_ops`].
#[derive(Clone, Debug)]
pub struct ReconConfig {
    /// Initial grid side; grown when the coefficients need more points.
    pub w: usize,
    /// Rows or columns that the computation may consume through shifts.
    pub margin: usize,
    pub primes: Vec<u64>,
    pub max_samples: usize,
    pub seed: u64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self { w: 48, margin: 24, primes: primes_below_2_31().take(16).collect(), max_samples: 4000, seed: 0x1a77 }
    }
}

/// Recovers the exact operators that `compute` produces on lattice images.
///
/// `compute` receives a fresh random lattice and returns monic operators
/// under `order` (or `None` on an unlucky lattice); their supports must not
/// depend on the lattice. The results are returned in integral form.
pub fn reconstruct_ops<C>(order: TermOrder, cfg: &ReconConfig, mut compute: C) -> Result<Vec<OreOp>>
where
    C: FnMut(&LatticeField) -> Option<Vec<LatticeOp>>,
{
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    // the shape: supports of the operators, from a first run
    let fp0 = PrimeField::new(cfg.primes[0]).expect("prime");
    let mut shape: Option<Vec<Vec<LMono>>> = None;
    for _ in 0..20 {
        let lf = random_lattice(&fp0, &mut rng, cfg.w + cfg.margin, false);
        if let Some(ops) = compute(&lf) {
            shape = Some(ops.iter().map(|p| p.support()).collect());
            break;
        }
    }
    let shape = shape.ok_or(LatticeError::Undefined)?;
    // the unknown coefficients: every non-leading term
    let slots: Vec<(usize, LMono)> = shape
        .iter()
        .enumerate()
        .flat_map(|(k, s)| {
            let lead = order.max(s.iter().copied()).unwrap();
            s.iter().copied().filter(move |&m| m != lead).map(move |m| (k, m))
        })
        .collect();
    let w = Cell::new(cfg.w);
    let slack = recon::DEFAULT_SLACK;
    let sampler = |fp: &PrimeField, rng: &mut StdRng| -> Option<(u64, Vec<(BiPoly, BiPoly)>)> {
        let lf = random_lattice(fp, rng, w.get() + cfg.margin, false);
        let ops = compute(&lf)?;
        if ops.iter().map(|p| p.support()).collect::<Vec<_>>() != shape {
            return None;
        }
        let (xs, ys) = (lf.xs(), lf.ys());
        let mut out = Vec::with_capacity(slots.len());
        for &(k, m) in &slots {
            let c = ops[k].coeff(m).unwrap();
            let (w1, w2) = c.window().unwrap_or((lf.w1, lf.w2));
            if w1.min(w2) < w.get() {
                // the computation consumed more than the margin
                return None;
            }
            let rows = lf.to_rows(c, w.get(), w.get())?;
            match recon::reconstruct_bivariate(fp, &xs[..w.get()], &ys[..w.get()], &rows, slack, rng) {
                Ok(nd) => out.push(nd),
                Err(ReconError::NeedMore) => {
                    w.set(w.get() * 3 / 2);
                    return None;
                }
                Err(_) => return None,
            }
        }
        Some((lf.q0, out))
    };
    let funcs = recon::reconstruct_functions(slots.len(), &cfg.primes, slack, cfg.max_samples, sampler, &mut rng)?;
    let mut terms: Vec<Vec<(LMono, crate::arith::ratfunc::RatFuncQMM)>> = shape
        .iter()
        .map(|s| vec![(order.max(s.iter().copied()).unwrap(), crate::arith::ratfunc::RatFuncQMM::one())])
        .collect();
    for ((k, m), f) in slots.into_iter().zip(funcs) {
        terms[k].push((m, f));
    }
    terms
        .into_iter()
        .map(|t| Ok(Ore::from_terms(&ExactField, t).integral(&order)?))
        .collect()
}

/// True if `exact` and `lat` agree as monic operators on the lattice.
pub fn agrees(lf: &LatticeField, exact: &OreOp, lat: &LatticeOp, order: &TermOrder) -> bool {
    match monic_image(lf, exact, order) {
        Ok(img) => {
            img.support() == lat.support()
                && img.terms().iter().all(|(m, c)| lat.coeff(*m).is_some_and(|d| lf.is_zero(&lf.sub(c, d))))
        }
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_operator;
    use crate::groebner::{buchberger, fglm, ReducedGb};

    #[test]
    fn reconstructs_a_lex_basis() {
        let gens = [
            parse_operator("L1 - q*M1*M2 - 1").unwrap(),
            parse_operator("(M2 + q)*L2^2 - M1*L2 - 1").unwrap(),
        ];
        let exact = buchberger(&ExactField, &gens, TermOrder::deglex()).unwrap();
        let want = fglm(&ExactField, &exact, TermOrder::lex()).unwrap();
        let cfg = ReconConfig { w: 12, margin: 8, ..Default::default() };
        let got = reconstruct_ops(TermOrder::lex(), &cfg, |lf| {
            let imgs: Vec<LatticeOp> =
                exact.gens().iter().map(|g| monic_image(lf, g, &TermOrder::deglex())).collect::<Result<_>>().ok()?;
            let gb = ReducedGb::from_reduced(lf, imgs, TermOrder::deglex()).ok()?;
            Some(fglm(lf, &gb, TermOrder::lex()).ok()?.into_gens())
        })
        .unwrap();
        let want: Vec<OreOp> = want.gens().iter().map(|g| g.integral(&TermOrder::lex()).unwrap()).collect();
        assert_eq!(got, want);
    }
}
