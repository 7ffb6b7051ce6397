use num_bigint::BigInt;
use proptest::prelude::*;
use qdimer::QLaurent;

fn arb_laurent() -> impl Strategy<Value = QLaurent> {
    (
        1u32..=3,
        prop::collection::vec((-6i64..=6, -9i64..=9), 0..6),
    )
        .prop_map(|(d, ts)| {
            QLaurent::from_terms(d, ts.into_iter().map(|(k, c)| (k, BigInt::from(c))))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in arb_laurent(), b in arb_laurent(), c in arb_laurent()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a - &a, QLaurent::zero());
    }

    #[test]
    fn multiply_then_divide(a in arb_laurent(), k in 1u32..5) {
        let b = QLaurent::qint(k);
        prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn divide_by_arbitrary_factor(a in arb_laurent(), b in arb_laurent()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn text_round_trip(a in arb_laurent()) {
        let t = a.to_text();
        prop_assert_eq!(t.parse::<QLaurent>().unwrap(), a.clone());
        let j = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<QLaurent>(&j).unwrap(), a);
    }
}
