//! Reference data for the trefoil: the operator `P1` with its known
//! factors, the term structure of `P2, P3, Q1, Q2`, and the
//! `q = 1` images.

use std::collections::HashMap;

use crate::arith::mpoly::MPolyQMM;
use crate::arith::ratfunc::RatFuncQMM;
use crate::format::{eval_expr, eval_statements, parse_operator, parse_statements, Expr, ParseError};
use crate::groebner::order::LMono;
use crate::ore::epsilon::CommPoly;
use crate::ore::{tau_map, OreOp};

pub const P1_TEXT: &str = include_str!("../../../golden/P1.ops");
pub const F_TEXT: &str = include_str!("../../../golden/F.polys");
pub const EPS_TEXT: &str = include_str!("../../../golden/eps.polys");
pub const P2_SKEL: &str = include_str!("../../../golden/P2.skel");
pub const P3_SKEL: &str = include_str!("../../../golden/P3.skel");
pub const Q1_SKEL: &str = include_str!("../../../golden/Q1.skel");
pub const Q2_SKEL: &str = include_str!("../../../golden/Q2.skel");

#[derive(thiserror::Error, Debug)]
pub enum GoldenError {
    #[error("{0}: {1}")]
    Parse(&'static str, ParseError),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

/// One reference term `cofactor * F_k * L^b` (or `tau(F_k)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonTerm {
    pub cofactor: MPolyQMM,
    pub factor: String,
    pub tau: bool,
    pub l: LMono,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub name: String,
    pub terms: Vec<SkeletonTerm>,
}

impl Skeleton {
    pub fn support(&self) -> Vec<LMono> {
        let mut v: Vec<LMono> = self.terms.iter().map(|t| t.l).collect();
        v.sort();
        v
    }

    pub fn term(&self, l: LMono) -> Option<&SkeletonTerm> {
        self.terms.iter().find(|t| t.l == l)
    }
}

fn flatten_product(e: &Expr, sign: &mut bool, out: &mut Vec<Expr>) {
    match e {
        Expr::Mul(a, b) => {
            flatten_product(a, sign, out);
            flatten_product(b, sign, out);
        }
        Expr::Neg(a) => {
            *sign = !*sign;
            flatten_product(a, sign, out);
        }
        other => out.push(other.clone()),
    }
}

fn is_f_name(s: &str) -> bool {
    s.len() > 1 && s.starts_with('F') && s[1..].chars().all(|c| c.is_ascii_digit())
}

fn l_exponent(e: &Expr) -> Option<LMono> {
    let (name, k) = match e {
        Expr::Name(s, ..) => (s.as_str(), 1),
        Expr::Pow(b, k, ..) => match b.as_ref() {
            Expr::Name(s, ..) => (s.as_str(), *k),
            _ => return None,
        },
        _ => return None,
    };
    if k < 0 {
        return None;
    }
    match name {
        "L1" => Some((k as u32, 0)),
        "L2" => Some((0, k as u32)),
        _ => None,
    }
}

/// Parses a skeleton: each line is `cofactor * F_k * L-monomial`.
pub fn parse_skeleton(name: &str, text: &str) -> Result<Skeleton, ParseError> {
    let mut terms = Vec::new();
    for st in parse_statements(text)? {
        let (expr, line) = match st {
            crate::format::Statement::Bare { expr, line } => (expr, line),
            crate::format::Statement::Header { .. } => continue,
            crate::format::Statement::Define { line, .. } => {
                return Err(ParseError { line, col: 1, msg: "definitions are not allowed in skeletons".into() })
            }
        };
        let mut neg = false;
        let mut factors = Vec::new();
        flatten_product(&expr, &mut neg, &mut factors);
        let mut cof = RatFuncQMM::from_int(if neg { -1 } else { 1 });
        let mut fname = None;
        let mut l = (0, 0);
        for f in factors {
            if let Some(b) = l_exponent(&f) {
                l = (l.0 + b.0, l.1 + b.1);
                continue;
            }
            match &f {
                Expr::Name(s, ..) if is_f_name(s) => {
                    fname = Some((s.clone(), false));
                    continue;
                }
                Expr::Call(c, a, ..) if c == "tau" => {
                    if let Expr::Name(s, ..) = a.as_ref() {
                        if is_f_name(s) {
                            fname = Some((s.clone(), true));
                            continue;
                        }
                    }
                }
                _ => {}
            }
            let v: RatFuncQMM = eval_expr(&f, &HashMap::new())?;
            cof = cof.mul(&v);
        }
        let (factor, tau) = fname.ok_or(ParseError { line, col: 1, msg: "term without an F factor".into() })?;
        if !cof.is_polynomial() {
            return Err(ParseError { line, col: 1, msg: "cofactor is not a polynomial".into() });
        }
        terms.push(SkeletonTerm { cofactor: cof.into_parts().0, factor, tau, l });
    }
    Ok(Skeleton { name: name.to_string(), terms })
}

/// Outcome of comparing an operator with a reference skeleton.
#[derive(Clone, Debug, Default)]
pub struct SkeletonReport {
    pub name: String,
    pub support_matches: bool,
    /// Terms whose known F-factor is known and matched exactly.
    pub known_factors: usize,
    pub failures: Vec<String>,
}

impl SkeletonReport {
    pub fn passed(&self) -> bool {
        self.support_matches && self.failures.is_empty()
    }
}

/// `p` scaled so that its lex-leading coefficient is 1.
fn unit_lead(p: &MPolyQMM) -> MPolyQMM {
    match p.lead() {
        Some((_, c)) => p.scale(&c.recip()),
        None => p.clone(),
    }
}

/// All reference data, parsed and self-checked.
#[derive(Clone, Debug)]
pub struct GoldenSet {
    pub p1: OreOp,
    pub f: HashMap<String, MPolyQMM>,
    pub skeletons: HashMap<String, Skeleton>,
    pub eps: HashMap<String, CommPoly>,
}

impl GoldenSet {
    pub fn load() -> Result<Self, GoldenError> {
        let p1 = parse_operator(P1_TEXT).map_err(|e| GoldenError::Parse("P1.ops", e))?;
        let st = parse_statements(F_TEXT).map_err(|e| GoldenError::Parse("F.polys", e))?;
        let (env, _, _) = eval_statements::<RatFuncQMM>(&st, HashMap::new()).map_err(|e| GoldenError::Parse("F.polys", e))?;
        let f = env.into_iter().map(|(k, v)| (k, v.into_parts().0)).collect();
        let mut skeletons = HashMap::new();
        for (n, t) in [("P2", P2_SKEL), ("P3", P3_SKEL), ("Q1", Q1_SKEL), ("Q2", Q2_SKEL)] {
            let s = parse_skeleton(n, t).map_err(|e| GoldenError::Parse("skeleton", e))?;
            skeletons.insert(n.to_string(), s);
        }
        let st = parse_statements(EPS_TEXT).map_err(|e| GoldenError::Parse("eps.polys", e))?;
        let (eps, _, _) = eval_statements::<CommPoly>(&st, HashMap::new()).map_err(|e| GoldenError::Parse("eps.polys", e))?;
        let g = Self { p1, f, skeletons, eps };
        g.self_check()?;
        Ok(g)
    }

    /// The reference skeleton of `P1` (cofactors and factor names).
    pub fn p1_skeleton(&self) -> Skeleton {
        let body: String = P1_TEXT
            .lines()
            .filter(|l| !l.starts_with(' ') && !l.starts_with("F") && !l.starts_with('#') && !l.starts_with("vars"))
            .map(|l| format!("{l}\n"))
            .collect();
        parse_skeleton("P1", &body).expect("P1 terms parse as a skeleton")
    }

    pub fn skeleton(&self, name: &str) -> &Skeleton {
        &self.skeletons[name]
    }

    /// Compares a polynomial operator with the skeleton `name`: same
    /// L-support, and each coefficient equal to its reference cofactor times a
    /// polynomial, which must be the known F-factor where that is known.
    /// The whole operator may differ from the reference one by a rational
    /// scalar. Factors that are not given are recorded in `found` on
    /// first sight and must agree (up to a scalar) on later sightings, also
    /// across operators.
    pub fn match_skeleton(&self, op: &OreOp, name: &str, found: &mut HashMap<String, MPolyQMM>) -> SkeletonReport {
        let sk = self.skeleton(name);
        let mut rep = SkeletonReport { name: name.to_string(), support_matches: op.support() == sk.support(), ..Default::default() };
        let mut scalar: Option<num_rational::BigRational> = None;
        for t in &sk.terms {
            let Some(c) = op.coeff(t.l) else { continue };
            let l = crate::format::fmt_l_monomial(t.l.0, t.l.1);
            if !c.is_polynomial() {
                rep.failures.push(format!("{l}: coefficient is not a polynomial"));
                continue;
            }
            let Some(quot) = c.num().div_exact(&t.cofactor) else {
                rep.failures.push(format!("{l}: reference cofactor does not divide the coefficient"));
                continue;
            };
            let fac = if t.tau { quot.swap_m() } else { quot };
            if let Some(known) = self.f.get(&t.factor) {
                // quot = s * F with one s for the whole operator
                let (Some((e, a)), Some((_, b))) = (fac.lead(), known.lead()) else {
                    rep.failures.push(format!("{l}: zero factor"));
                    continue;
                };
                let s = a / b;
                if fac != known.scale(&s) || known.lead().map(|x| x.0) != Some(e) {
                    rep.failures.push(format!("{l}: quotient is not a multiple of {}", t.factor));
                    continue;
                }
                match &scalar {
                    Some(s0) if *s0 != s => rep.failures.push(format!("{l}: inconsistent scalar")),
                    _ => scalar = Some(s),
                }
                rep.known_factors += 1;
            } else {
                let u = unit_lead(&fac);
                match found.get(&t.factor) {
                    Some(prev) if *prev != u => rep.failures.push(format!("{l}: {} differs from an earlier sighting", t.factor)),
                    Some(_) => {}
                    None => {
                        found.insert(t.factor.clone(), u);
                    }
                }
            }
        }
        rep
    }

    fn self_check(&self) -> Result<(), GoldenError> {
        let bad = |m: &str| Err(GoldenError::SelfCheck(m.to_string()));
        if tau_map(&self.p1) != self.p1.neg(&crate::ore::ExactField) {
            return bad("tau(P1) != -P1");
        }
        let sup: Vec<LMono> = self.p1.support();
        if sup != vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)] {
            return bad("P1 support");
        }
        for k in ["p2", "p3"] {
            let p = &self.eps[k];
            // divisibility by (L2 - 1): p vanishes at L2 = 1
            let at1 = CommPoly::from_terms(p.terms().iter().map(|(e, c)| ([e[0], e[1], e[2], 0], c.clone())));
            if !at1.is_zero() {
                return bad(&format!("{k} lacks the factor (-1 + L2)"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_operator;

    #[test]
    fn golden_loads_and_checks() {
        let g = GoldenSet::load().unwrap();
        assert_eq!(g.skeleton("Q1").support(), vec![(0, 0), (0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        assert_eq!(g.skeleton("Q2").support(), vec![(0, 0), (0, 1), (0, 2), (0, 3), (0, 4), (1, 0)]);
        assert_eq!(g.skeleton("P2").term((0, 3)).unwrap().factor, "F1");
        assert!(g.p1.is_polynomial());
    }

    #[test]
    fn p1_leading_coefficient_is_cofactor_times_f1() {
        let g = GoldenSet::load().unwrap();
        let sk = g.p1_skeleton();
        let t = sk.term((2, 0)).unwrap();
        let c = g.p1.coeff((2, 0)).unwrap().num().clone();
        assert_eq!(c.div_exact(&t.cofactor).unwrap(), g.f["F1"]);
    }

    #[test]
    fn p1_round_trips() {
        let g = GoldenSet::load().unwrap();
        let text = serialize_operator(&g.p1);
        assert_eq!(parse_operator(&text).unwrap(), g.p1);
    }

    #[test]
    fn skeleton_rejects_missing_factor() {
        assert!(parse_skeleton("X", "q*L1\n").is_err());
    }
}
