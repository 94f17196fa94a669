mod common;

use perpetual_core::network::{SimParams, SourcePhasing};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SimParams> {
    (
        1usize..=24,
        0.5f64..200.0,
        prop_oneof![Just(0.0), 0.0f64..0.1],
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|(half_n, bias, p_m, in_phase, seed)| {
            let phasing = if in_phase {
                SourcePhasing::InPhase
            } else {
                SourcePhasing::Staggered
            };
            SimParams::new(2 * half_n, bias)
                .unwrap()
                .with_p_m(p_m)
                .unwrap()
                .with_phasing(phasing)
                .with_seed(seed)
        })
}

/// Fast-filling variant so that full rings and the shunt are exercised.
fn busy_params() -> impl Strategy<Value = SimParams> {
    (params(), 0.05f64..1.0, 0.0f64..0.02)
        .prop_map(|(p, p_s, p_l)| p.with_p_loss(p_l).unwrap().with_p_s(p_s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn structural_invariants(p in params()) {
        common::run_checked(&p, 1000).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn structural_invariants_busy(p in busy_params()) {
        common::run_checked(&p, 1000).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn determinism(p in params()) {
        prop_assert_eq!(common::trace(&p, 1000), common::trace(&p, 1000));
    }

    #[test]
    fn lossless_fixpoint(half_n in 1usize..=24, p_s in 0.05f64..1.0, seed: u64, in_phase: bool) {
        let phasing = if in_phase { SourcePhasing::InPhase } else { SourcePhasing::Staggered };
        common::check_lossless_fixpoint(2 * half_n, p_s, seed, phasing, 1000)
            .map_err(TestCaseError::fail)?;
    }
}
