#[allow(dead_code)]
mod common;

use common::props::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn multiplication_is_associative(a in small_op(), b in small_op(), c in small_op()) {
        assoc(&a, &b, &c)?;
    }

    #[test]
    fn action_is_compatible_with_multiplication(a in small_op(), b in small_op(), s in test_seq(), n1 in 0i64..4, n2 in 0i64..4) {
        action(&a, &b, &s, n1, n2)?;
    }

    #[test]
    fn normal_form_is_idempotent(p in small_op(), r in small_op()) {
        nf_idempotent(&p, &r)?;
    }

    #[test]
    fn guessing_agrees_across_primes(s in quad_seq(), st in structure(), v in (2u64..1000, 2u64..1000)) {
        multi_prime(&s, &st, v)?;
    }

    #[test]
    fn eval_mod_is_a_homomorphism(a in laurent(), b in laurent(), x in small_poly(), y in small_poly(), v0 in 2u64..1_000_000) {
        eval_mod_hom(&a, &b, &x, &y, v0)?;
    }

    #[test]
    fn reduction_commutes_with_the_action(p in small_op(), s in test_seq(), v0 in 2u64..1_000_000, n1 in 0i64..4, n2 in 0i64..4) {
        apply_mod_hom(&p, &s, v0, n1, n2)?;
    }
}

#[test]
fn quadratic_sequences_have_relations() {
    use qholonomic::guess::{grid_points, kernel_dimension, GuessProblem, StructureSet};
    // q^(n1^2) satisfies L1 - q M1^2, so the first relation has M-degree 2.
    // On a 4x4 grid the identity C0 + q M1^2 C1 = 0 has degree 4 and picks up
    // a spurious solution; a 6x6 grid does not.
    let s = QuadSeq(vec![(1, 0, 0, 0)]);
    let t = s.table(8, 3, qholonomic::arith::modp::DEFAULT_PRIME);
    let dim = |d: u32, side: u32| {
        let st = StructureSet::dense(&[(0, 0), (1, 0)], d);
        kernel_dimension(&GuessProblem { table: &t, structure: &st, points: grid_points(side) }).unwrap()
    };
    assert_eq!(dim(2, 6), 1);
    assert_eq!(dim(1, 6), 0);
    assert_eq!(dim(2, 4), 2);
}
