// Randomized properties shared by the property suite and the acceptance run.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use qholonomic::arith::modp::{primes_below_2_31, PrimeField};
use qholonomic::arith::mpoly::MPolyQMM;
use qholonomic::arith::qlaurent::QLaurent;
use qholonomic::format::parse_operator;
use qholonomic::groebner::order::{divides, TermOrder};
use qholonomic::groebner::{buchberger, normal_form, ReducedGb};
use qholonomic::guess::{check_order, guess, required_n_max, StructureSet};
use qholonomic::jones::{SequenceTable, TorusKnot};
use qholonomic::arith::ratfunc::RatFuncQMM;
use qholonomic::ore::{ore_apply, ore_apply_mod, ExactField, FnOracle, OreOp};

pub const CASES: u32 = 128;

pub fn small_poly() -> impl Strategy<Value = MPolyQMM> {
    prop::collection::vec(((0u32..3, 0u32..3, 0u32..3), -3i64..=3), 1..4)
        .prop_map(|t| MPolyQMM::from_int_terms(t.into_iter().map(|(e, c)| (e, BigInt::from(c)))))
}

/// A random operator with polynomial coefficients and shifts up to 2.
pub fn small_op() -> impl Strategy<Value = OreOp> {
    prop::collection::vec(((0u32..3, 0u32..3), small_poly()), 1..4).prop_map(OreOp::from_poly_terms)
}

pub fn laurent() -> impl Strategy<Value = QLaurent> {
    prop::collection::vec((-12i64..12, -20i64..20), 0..6).prop_map(|t| {
        QLaurent::from_terms(t.into_iter().map(|(e, c)| (e, BigRational::from_integer(BigInt::from(c)))))
    })
}

/// `f(n1, n2) = Σ c v^(k0 + k1 n1 + k2 n2)`.
#[derive(Clone, Debug)]
pub struct TestSeq(pub Vec<(i64, i64, i64, i64)>);

impl TestSeq {
    pub fn at(&self, n1: i64, n2: i64) -> QLaurent {
        QLaurent::from_terms(
            self.0.iter().map(|&(k0, k1, k2, c)| (k0 + k1 * n1 + k2 * n2, BigRational::from_integer(BigInt::from(c)))),
        )
    }
}

pub fn test_seq() -> impl Strategy<Value = TestSeq> {
    prop::collection::vec((-6i64..6, -3i64..4, -3i64..4, 1i64..5), 1..4).prop_map(TestSeq)
}

pub fn assoc(a: &OreOp, b: &OreOp, c: &OreOp) -> Result<(), TestCaseError> {
    let f = ExactField;
    prop_assert_eq!(a.mul(&f, b).mul(&f, c), a.mul(&f, &b.mul(&f, c)));
    // distributivity on the left
    prop_assert_eq!(a.mul(&f, &b.add(&f, c)), a.mul(&f, b).add(&f, &a.mul(&f, c)));
    Ok(())
}

/// `(a b) f = a (b f)` at a few points.
pub fn action(a: &OreOp, b: &OreOp, s: &TestSeq, n1: i64, n2: i64) -> Result<(), TestCaseError> {
    let f = FnOracle(|x: i64, y: i64| Some(s.at(x, y)));
    let bf = FnOracle(|x: i64, y: i64| ore_apply(b, &f, x, y).ok()?.to_laurent());
    let lhs = ore_apply(&a.mul(&ExactField, b), &f, n1, n2).unwrap().to_laurent().unwrap();
    let rhs = ore_apply(a, &bf, n1, n2).unwrap().to_laurent().unwrap();
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

fn example_gb() -> &'static ReducedGb<RatFuncQMM> {
    static GB: OnceLock<ReducedGb<RatFuncQMM>> = OnceLock::new();
    GB.get_or_init(|| {
        let gens = [
            parse_operator("L1 - q*M1*M2 - 1").unwrap(),
            parse_operator("(M2 + q)*L2^2 - M1*L2 - 1").unwrap(),
        ];
        buchberger(&ExactField, &gens, TermOrder::deglex()).unwrap()
    })
}

/// NF is idempotent, lands below the staircase and ignores left multiples
/// of the generators.
pub fn nf_idempotent(p: &OreOp, r: &OreOp) -> Result<(), TestCaseError> {
    let f = ExactField;
    let gb = example_gb();
    let o = gb.order();
    let nf = normal_form(&f, p, gb.gens(), &o);
    prop_assert_eq!(normal_form(&f, &nf, gb.gens(), &o), nf.clone());
    for m in nf.support() {
        prop_assert!(gb.leads().iter().all(|&l| !divides(l, m)));
    }
    let shifted = p.add(&f, &r.mul(&f, &gb.gens()[0]));
    prop_assert_eq!(normal_form(&f, &shifted, gb.gens(), &o), nf);
    Ok(())
}

/// A sum of two q-quadratic exponentials, `q^(a n1^2 + b n1 n2 + c n2^2 + d n1)`.
#[derive(Clone, Debug)]
pub struct QuadSeq(pub Vec<(u64, u64, u64, u64)>);

impl QuadSeq {
    fn exponent(t: &(u64, u64, u64, u64), n1: u64, n2: u64) -> u64 {
        t.0 * n1 * n1 + t.1 * n1 * n2 + t.2 * n2 * n2 + t.3 * n1
    }

    pub fn table(&self, n: u32, v0: u64, p: u64) -> SequenceTable {
        let fp = PrimeField::new(p).unwrap();
        let q0 = fp.pow(v0, 6);
        SequenceTable::from_modular_fn(TorusKnot::new(1).unwrap(), n, v0, p, |a, b| {
            self.0.iter().fold(0, |acc, t| fp.add(acc, fp.pow(q0, Self::exponent(t, a as u64, b as u64))))
        })
    }
}

pub fn quad_seq() -> impl Strategy<Value = QuadSeq> {
    prop::collection::vec((0u64..2, 0u64..2, 0u64..2, 0u64..3), 1..3).prop_map(QuadSeq)
}

pub fn structure() -> impl Strategy<Value = StructureSet> {
    let support = prop::sample::subsequence(vec![(0u32, 0u32), (1, 0), (0, 1), (1, 1)], 1..=4);
    (support, 0u32..3).prop_map(|(s, d)| StructureSet::dense(&s, d))
}

/// The ansatz has the same kernel dimension and (for a one-dimensional
/// kernel) the same vanishing pattern at two primes and specializations.
pub fn multi_prime(seq: &QuadSeq, st: &StructureSet, v: (u64, u64)) -> Result<(), TestCaseError> {
    let primes: Vec<u64> = primes_below_2_31().take(2).collect();
    let n = required_n_max(st, 20);
    let mut seen = Vec::new();
    for (&p, v0) in primes.iter().zip([v.0, v.1]) {
        prop_assume!(check_order(v0, p, 4 * n * n + 8).is_ok());
        let r = guess(&seq.table(n, v0, p), st, 20).unwrap();
        seen.push((r.kernel_dim, r.pattern));
    }
    prop_assert_eq!(&seen[0], &seen[1]);
    Ok(())
}

/// Reduction modulo p commutes with the ring operations and with the
/// action of an operator.
pub fn eval_mod_hom(a: &QLaurent, b: &QLaurent, x: &MPolyQMM, y: &MPolyQMM, v0: u64) -> Result<(), TestCaseError> {
    let fp = PrimeField::default_field();
    let ev = |t: &QLaurent| t.eval_mod(v0, &fp).unwrap();
    prop_assert_eq!(ev(&a.mul(b)), fp.mul(ev(a), ev(b)));
    prop_assert_eq!(ev(&a.add(b)), fp.add(ev(a), ev(b)));
    let q0 = fp.pow(v0, 6);
    let (m1, m2) = (fp.pow(q0, 3), fp.pow(v0, 5));
    let em = |t: &MPolyQMM| t.eval_mod(q0, m1, m2, &fp).unwrap();
    prop_assert_eq!(em(&x.mul(y)), fp.mul(em(x), em(y)));
    prop_assert_eq!(em(&x.sub(y)), fp.sub(em(x), em(y)));
    Ok(())
}

pub fn apply_mod_hom(p: &OreOp, s: &TestSeq, v0: u64, n1: i64, n2: i64) -> Result<(), TestCaseError> {
    let fp = PrimeField::default_field();
    let f = FnOracle(|x: i64, y: i64| Some(s.at(x, y)));
    let fm = FnOracle(|x: i64, y: i64| s.at(x, y).eval_mod(v0, &fp).ok());
    let exact = ore_apply(p, &f, n1, n2).unwrap().to_laurent().unwrap();
    let modular = ore_apply_mod(p, &fm, fp.pow(v0, 6), &fp, n1, n2).unwrap();
    prop_assert_eq!(exact.eval_mod(v0, &fp).unwrap(), modular);
    Ok(())
}

/// Runs all five property families with [`CASES`] cases each; returns the
/// failures by name.
pub fn run_all() -> Vec<(String, String)> {
    use proptest::test_runner::{Config, TestRunner};
    let mut fails = Vec::new();
    let mut go = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            fails.push((name.to_string(), e));
        }
    };
    let cfg = || Config { cases: CASES, failure_persistence: None, ..Config::default() };
    go(
        "associativity",
        TestRunner::new(cfg())
            .run(&(small_op(), small_op(), small_op()), |(a, b, c)| assoc(&a, &b, &c))
            .map_err(|e| e.to_string()),
    );
    go(
        "action",
        TestRunner::new(cfg())
            .run(&(small_op(), small_op(), test_seq(), 0i64..4, 0i64..4), |(a, b, s, x, y)| action(&a, &b, &s, x, y))
            .map_err(|e| e.to_string()),
    );
    go(
        "nf_idempotence",
        TestRunner::new(cfg()).run(&(small_op(), small_op()), |(p, r)| nf_idempotent(&p, &r)).map_err(|e| e.to_string()),
    );
    go(
        "multi_prime_guessing",
        TestRunner::new(cfg())
            .run(&(quad_seq(), structure(), (2u64..1000, 2u64..1000)), |(s, st, v)| multi_prime(&s, &st, v))
            .map_err(|e| e.to_string()),
    );
    go(
        "eval_mod",
        TestRunner::new(cfg())
            .run(&(laurent(), laurent(), small_poly(), small_poly(), 2u64..1_000_000), |(a, b, x, y, v)| {
                eval_mod_hom(&a, &b, &x, &y, v)
            })
            .map_err(|e| e.to_string()),
    );
    go(
        "eval_mod_action",
        TestRunner::new(cfg())
            .run(&(small_op(), test_seq(), 2u64..1_000_000, 0i64..4, 0i64..4), |(p, s, v, x, y)| {
                apply_mod_hom(&p, &s, v, x, y)
            })
            .map_err(|e| e.to_string()),
    );
    fails
}
