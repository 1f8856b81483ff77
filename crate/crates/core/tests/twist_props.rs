mod common;

use common::{random_twr, rng};
use drclosure::graph::validate;
use drclosure::twist::{pushforward_check, stabilize, twist, Twr};
use drclosure::twr::{validate_twdr, validate_twr};
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(cases(600))]

    #[test]
    fn twist_then_stabilize_is_the_identity(seed in any::<u64>()) {
        let (graph, levels, dec) = random_twr(&mut rng(seed), 6);
        prop_assert!(validate(&graph).is_stable());
        let report = validate_twr(&graph, &levels, &dec);
        prop_assert!(report.is_valid(), "generator produced an invalid input: {}", report.summary());

        let t = twist(&graph, &levels, &dec).unwrap();
        let tw = &t.twisted;
        let twdr = validate_twdr(&tw.graph, &tw.levels, &tw.dec);
        prop_assert!(twdr.is_valid(), "{}", twdr.summary());

        let (back, map) = stabilize(&tw.graph, &tw.levels, &tw.dec).unwrap();
        let original = Twr { graph, levels, dec };
        prop_assert_eq!(&back, &original);
        let push = pushforward_check(tw, &back, &map).unwrap();
        prop_assert!(push.is_ok());
    }
}
