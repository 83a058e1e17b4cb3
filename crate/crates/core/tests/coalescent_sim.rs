use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use frozen_er::coalescent::{EventKind, ParticleSystem};
use frozen_er::harness::chi_square;
use frozen_er::harness::experiments::first_event_categories;
use frozen_er::rng::replica_seed;

/// Brute-force first-event classification by what changed in the state.
fn classify(before: &ParticleSystem, after: &ParticleSystem, kind: EventKind) -> String {
    let gone: Vec<usize> = (0..before.standard.len())
        .filter(|&i| !after.standard.contains(&before.standard[i]))
        .collect();
    match kind {
        EventKind::Freeze => {
            let x = *after.frozen.last().unwrap();
            let i = before.standard.iter().position(|&m| m == x).unwrap();
            format!("freeze_{i}")
        }
        EventKind::StdStdMerge => {
            let merged: f64 = after
                .standard
                .iter()
                .find(|m| !before.standard.contains(m))
                .copied()
                .unwrap();
            let k = before.standard.len();
            let (i, j) = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .find(|&(i, j)| before.standard[i] + before.standard[j] == merged)
                .unwrap();
            format!("merge_{i}_{j}")
        }
        EventKind::StdFrozenMerge => {
            let i = gone[0];
            let j = (0..before.frozen.len())
                .find(|&j| after.frozen[j] != before.frozen[j])
                .unwrap();
            format!("absorb_{i}_{j}")
        }
    }
}

#[test]
fn first_event_frequencies_match_rates() {
    let systems = [
        (vec![1.0, 1.5], vec![], 0.5),
        (vec![0.5, 1.25, 2.0], vec![0.75], 0.3),
        (vec![1.5], vec![1.0, 2.5, 0.3], 0.9),
        (vec![0.4, 0.75, 1.1, 1.9], vec![], 1.0),
    ];
    for (s, (standard, frozen, p)) in systems.into_iter().enumerate() {
        let sys = ParticleSystem::new(standard, frozen, p).unwrap();
        let (names, probs) = first_event_categories(&sys);
        let mut counts = vec![0u64; names.len()];
        for r in 0..100_000 {
            let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(100 + s as u64, r));
            let mut after = sys.clone();
            let kind = after.gillespie_step(&mut rng).unwrap();
            let label = classify(&sys, &after, kind);
            counts[names.iter().position(|n| *n == label).unwrap()] += 1;
        }
        let (stat, pval) = chi_square(&counts, &probs).unwrap();
        assert!(
            pval > 0.01,
            "system {s}: chi2 {stat}, p {pval}, counts {counts:?}, probs {probs:?}"
        );
    }
}

#[test]
fn unit_particle_freezes_after_mean_two() {
    let n = 10_000;
    let total: f64 = (0..n)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(5, r));
            let mut s = ParticleSystem::new(vec![1.0], vec![], 0.4).unwrap();
            s.run_until(f64::INFINITY, &mut rng).unwrap();
            assert!(s.is_absorbing());
            s.time
        })
        .sum();
    let mean = total / n as f64;
    assert!((mean - 2.0).abs() < 0.06, "{mean}");
}

#[test]
fn many_small_particles_all_freeze() {
    let n = 64;
    let m = (n as f64).powf(-1.0 / 3.0);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = ParticleSystem::new(vec![m; n], vec![], 1.0).unwrap();
        let total = s.total_mass();
        s.run_until(f64::INFINITY, &mut rng).unwrap();
        assert!(s.is_absorbing() && s.total_rate() == 0.0);
        assert!((s.frozen_mass() / total - 1.0).abs() < 1e-14);
    }
}

#[test]
fn finite_horizon_stops_the_clock() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut s = ParticleSystem::new(vec![0.01, 0.02], vec![], 0.5).unwrap();
    s.run_until(1e-6, &mut rng).unwrap();
    assert_eq!(s.time, 1e-6);
    assert_eq!(s.standard.len(), 2);
}

fn system() -> impl Strategy<Value = ParticleSystem> {
    (
        prop::collection::vec(0.05f64..3.0, 1..8),
        prop::collection::vec(0.05f64..3.0, 0..4),
        0.0f64..=1.0,
    )
        .prop_map(|(s, f, p)| ParticleSystem::new(s, f, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectories_respect_invariants(mut sys in system(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mass = sys.total_mass();
        let n = sys.standard.len() + sys.frozen.len();
        loop {
            let before = sys.clone();
            let Some(kind) = sys.gillespie_step(&mut rng) else { break };
            prop_assert!((sys.total_mass() - mass).abs() <= 4.0 * f64::EPSILON * n as f64 * mass);
            prop_assert!(sys.frozen_mass() >= before.frozen_mass() * (1.0 - 4.0 * f64::EPSILON));
            prop_assert!(sys.standard.len() < before.standard.len());
            prop_assert!(sys.time > before.time);
            if sys.p == 0.0 {
                prop_assert_ne!(kind, EventKind::StdFrozenMerge);
                prop_assert!(sys.frozen.len() >= before.frozen.len());
            }
            if before.frozen.is_empty() {
                prop_assert_ne!(kind, EventKind::StdFrozenMerge);
            }
        }
        prop_assert!(sys.is_absorbing());
    }

    #[test]
    fn p_zero_never_absorbs(standard in prop::collection::vec(0.05f64..3.0, 1..8), frozen in prop::collection::vec(0.05f64..3.0, 1..4), seed in any::<u64>()) {
        let mut sys = ParticleSystem::new(standard, frozen.clone(), 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sys.run_until(f64::INFINITY, &mut rng).unwrap();
        // Pre-existing frozen particles are untouched.
        prop_assert_eq!(&sys.frozen[..frozen.len()], &frozen[..]);
    }
}
