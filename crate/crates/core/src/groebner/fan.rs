//! The Groebner fan of a zero-dimensional left ideal in two L-variables.
//!
//! Weight vectors `(w1, w2)` in the closed positive quadrant are
//! parametrized by the slope `s = w2 / w1`. The fan is walked from `s = 0`
//! (lex with `L1 > L2`) to `s = ∞`: the cone of the current basis ends at
//! the largest slope keeping every leading monomial leading; just beyond it
//! the next basis is obtained by FGLM into the weight order of the boundary
//! ray with ties broken towards `L2`.

use std::cmp::Ordering;

use num_integer::Integer;

use super::order::{LMono, OrderKind, Precedence, TermOrder};
use super::{fglm, GbError, ReducedGb, Result};
use crate::ore::CoeffField;

/// A ray `(w1, w2)` with coprime entries.
pub type Ray = (u64, u64);

/// One maximal cone `[lower, upper]` and the reduced basis valid inside it.
#[derive(Clone, Debug, PartialEq)]
pub struct FanCone<E> {
    pub lower: Ray,
    pub upper: Ray,
    pub gb: ReducedGb<E>,
}

/// Compares slopes `a.1 / a.0` and `b.1 / b.0` (with `(0, 1)` as infinity).
pub fn cmp_slope(a: Ray, b: Ray) -> Ordering {
    (a.1 as u128 * b.0 as u128).cmp(&(b.1 as u128 * a.0 as u128))
}

fn primitive(a: u64, b: u64) -> Ray {
    let g = a.gcd(&b).max(1);
    (a / g, b / g)
}

/// The slope interval `[lower, upper]` on which `gb`'s leading monomials
/// stay leading: for each generator and each other term `t`,
/// `(lead - t) · w >= 0`.
pub fn cone_of<E: Clone + PartialEq + std::fmt::Debug>(gb: &ReducedGb<E>) -> (Ray, Ray) {
    let mut lower: Ray = (1, 0);
    let mut upper: Ray = (0, 1);
    for g in gb.gens() {
        let l = g.lead_monomial(&gb.order()).unwrap();
        for t in g.support() {
            if t == l {
                continue;
            }
            let d1 = l.0 as i64 - t.0 as i64;
            let d2 = l.1 as i64 - t.1 as i64;
            // d1 + d2 s >= 0 on w = (1, s)
            if d2 > 0 && d1 < 0 {
                let r = primitive(d2 as u64, (-d1) as u64);
                if cmp_slope(r, lower) == Ordering::Greater {
                    lower = r;
                }
            } else if d2 < 0 && d1 > 0 {
                let r = primitive((-d2) as u64, d1 as u64);
                if cmp_slope(r, upper) == Ordering::Less {
                    upper = r;
                }
            }
        }
    }
    (lower, upper)
}

/// All cones of the fan, ordered by slope. `gb` may be any basis of the
/// ideal (zero-dimensional).
pub fn groebner_fan<F: CoeffField>(f: &F, gb: &ReducedGb<F::Elem>) -> Result<Vec<FanCone<F::Elem>>> {
    let mut cur = fglm(f, gb, TermOrder::lex())?;
    let mut out = Vec::new();
    loop {
        let (lower, upper) = cone_of(&cur);
        out.push(FanCone { lower, upper, gb: cur.clone() });
        if upper == (0, 1) {
            break;
        }
        if out.len() > 1000 {
            return Err(GbError::NotZeroDimensional);
        }
        let next = TermOrder { kind: OrderKind::Weighted(upper.0, upper.1), precedence: Precedence::L2First };
        cur = fglm(f, &cur, next)?;
    }
    Ok(out)
}

/// Interior rays (boundaries between consecutive cones).
pub fn interior_rays<E>(cones: &[FanCone<E>]) -> Vec<Ray> {
    cones.iter().take(cones.len().saturating_sub(1)).map(|c| c.upper).collect()
}

/// True if the rays are closed under `(w1, w2) -> (w2, w1)`.
pub fn is_swap_symmetric(rays: &[Ray]) -> bool {
    rays.iter().all(|&(a, b)| rays.contains(&(b, a)))
}

/// Leading monomials of the basis in each cone.
pub fn cone_leads<E: Clone + PartialEq + std::fmt::Debug>(cones: &[FanCone<E>]) -> Vec<Vec<LMono>> {
    cones.iter().map(|c| c.gb.leads()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_operator;
    use crate::groebner::buchberger;
    use crate::ore::ExactField;

    #[test]
    fn fan_of_a_trivial_ideal_is_one_cone() {
        let f = ExactField;
        let gens = [parse_operator("L1 - 1").unwrap(), parse_operator("L2 - 1").unwrap()];
        let gb = buchberger(&f, &gens, TermOrder::deglex()).unwrap();
        let fan = groebner_fan(&f, &gb).unwrap();
        assert_eq!(fan.len(), 1);
        assert!(interior_rays(&fan).is_empty());
    }

    #[test]
    fn fan_with_one_wall() {
        // L1^2 - M1 L2 and L2^2 - 1: L1^2 stops leading where 2 w1 = w2
        let f = ExactField;
        let gens = [parse_operator("L1^2 - M1*L2").unwrap(), parse_operator("L2^2 - 1").unwrap()];
        let gb = buchberger(&f, &gens, TermOrder::deglex()).unwrap();
        let fan = groebner_fan(&f, &gb).unwrap();
        assert_eq!(interior_rays(&fan), vec![(1, 2)]);
    }

    #[test]
    fn slopes() {
        assert_eq!(cmp_slope((4, 1), (2, 1)), Ordering::Less);
        assert_eq!(cmp_slope((1, 0), (1, 4)), Ordering::Less);
        assert!(is_swap_symmetric(&[(4, 1), (1, 1), (1, 4)]));
        assert!(!is_swap_symmetric(&[(4, 1), (1, 1)]));
    }
}
