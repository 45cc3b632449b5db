mod common;

use proptest::prelude::*;

use common::random::{check_instance, random_instance};

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_instances_agree_with_oracle(seed in any::<u64>()) {
        let inst = random_instance(seed);
        if let Err(e) = check_instance(&inst, &common::solver()) {
            prop_assert!(false, "{e}\n{}\n{}\n{}", inst.domain, inst.problem, inst.features);
        }
    }
}
