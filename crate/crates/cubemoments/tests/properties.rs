//! Randomized invariants for the polynomial ring, the pattern algebra, and
//! the union-cardinality machinery.

use cubemoments::cubes::{subset_union_table, union_cardinality, CubePattern, UnionAlgorithm};
use cubemoments::exactalg::rat;
use cubemoments::BiPoly;
use proptest::prelude::*;

fn arb_poly() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec(((0u32..4, 0u32..4), -20i64..20, 1i64..8), 0..6).prop_map(|terms| {
        terms
            .into_iter()
            .fold(BiPoly::zero(), |acc, ((dn, dq), num, den)| {
                acc.add(&BiPoly::monomial(dn, dq, rat(num, den)))
            })
    })
}

fn arb_pattern(width: u32) -> impl Strategy<Value = CubePattern> {
    let mask = (1u64 << width) - 1;
    (0..=mask, 0..=mask)
        .prop_map(move |(stars, bits)| CubePattern::new(width, stars, bits).unwrap())
}

proptest! {
    #[test]
    fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.sub(&a), BiPoly::zero());
        prop_assert_eq!(a.mul(&BiPoly::one()), a.clone());
        prop_assert_eq!(a.mul(&BiPoly::zero()), BiPoly::zero());
    }

    #[test]
    fn evaluation_is_a_ring_map(a in arb_poly(), b in arb_poly(), n in 0u32..12) {
        prop_assert_eq!(a.add(&b).eval_at_n(n), a.eval_at_n(n) + b.eval_at_n(n));
        prop_assert_eq!(a.mul(&b).eval_at_n(n), a.eval_at_n(n) * b.eval_at_n(n));
    }

    #[test]
    fn json_round_trip(a in arb_poly()) {
        let text = a.to_json_string();
        prop_assert_eq!(BiPoly::from_json_str(&text).unwrap(), a);
    }

    #[test]
    fn pattern_string_round_trip(p in arb_pattern(8)) {
        prop_assert_eq!(CubePattern::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn union_algorithms_agree(ps in prop::collection::vec(arb_pattern(6), 1..5)) {
        let ie = union_cardinality(&ps, UnionAlgorithm::InclusionExclusion).unwrap();
        let pe = union_cardinality(&ps, UnionAlgorithm::PointEnum).unwrap();
        prop_assert_eq!(ie, pe);
    }

    #[test]
    fn union_table_is_monotone(ps in prop::collection::vec(arb_pattern(6), 1..5)) {
        let table = subset_union_table(&ps);
        for t in 1..table.len() {
            for i in 0..ps.len() {
                let sub = t & !(1 << i);
                if sub != 0 {
                    prop_assert!(table[sub] <= table[t]);
                }
            }
            prop_assert!(table[t] <= 64);
        }
    }

    #[test]
    fn intersection_is_the_pointwise_meet(a in arb_pattern(6), b in arb_pattern(6)) {
        let meet = a.intersect(&b).unwrap();
        for x in 0..(1u64 << 6) {
            let both = a.contains_point(x) && b.contains_point(x);
            match &meet {
                Some(c) => prop_assert_eq!(both, c.contains_point(x)),
                None => prop_assert!(!both),
            }
        }
    }
}
