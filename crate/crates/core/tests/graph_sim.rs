use frozen_er::graph::*;
use proptest::prelude::*;

#[test]
fn p1_coupling_holds_along_full_trajectories() {
    for seed in 0..10u64 {
        let n = 2000;
        let mut g = GraphState::new(n, 1.0, seed).unwrap();
        for _ in 0..3 * n {
            g.apply_edge();
            assert_eq!(
                g.frozen_vertices(),
                g.surplus_vertices(),
                "seed {seed} m {}",
                g.m()
            );
            assert!(g.forests_coincide(), "seed {seed} m {}", g.m());
        }
        g.check_invariants().unwrap();
    }
}

#[test]
fn p0_frozen_components_never_grow() {
    let mut g = GraphState::new(3000, 0.0, 11).unwrap();
    for _ in 0..6000 {
        assert_ne!(g.apply_edge(), TransitionKind::TreeFrozenKept);
    }
    g.check_invariants().unwrap();
}

#[test]
fn same_seed_shares_edges_across_p() {
    let a = GraphState::new(100, 0.0, 5).unwrap();
    let b = GraphState::new(100, 1.0, 5).unwrap();
    for m in 0..200 {
        assert_eq!(a.sample(m), b.sample(m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structure_is_preserved(n in 1u32..400, p in 0.0f64..=1.0, seed in any::<u64>(), steps in 0usize..1200) {
        let mut g = GraphState::new(n, p, seed).unwrap();
        let mut last_frozen = 0;
        let mut last_discarded = 0;
        for i in 0..steps {
            g.apply_edge();
            prop_assert!(g.frozen_vertices() >= last_frozen);
            prop_assert!(g.discarded() >= last_discarded);
            last_frozen = g.frozen_vertices();
            last_discarded = g.discarded();
            if i % 97 == 0 {
                g.check_invariants().map_err(TestCaseError::fail)?;
            }
        }
        g.check_invariants().map_err(TestCaseError::fail)?;
        let obs = g.observables();
        let total: u64 = obs.frozen_sizes.iter().chain(obs.standard_sizes.iter()).map(|&s| s as u64).sum();
        prop_assert_eq!(total, n as u64);
        prop_assert!(obs.frozen_sizes.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(obs.standard_sizes.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(g.kept() + g.discarded(), g.m());
    }

    #[test]
    fn coupling_identity_for_p_one(n in 1u32..300, seed in any::<u64>(), steps in 0usize..900) {
        let mut g = GraphState::new(n, 1.0, seed).unwrap();
        for _ in 0..steps {
            g.apply_edge();
            prop_assert_eq!(g.frozen_vertices(), g.surplus_vertices());
            prop_assert!(g.forests_coincide());
        }
    }
}
