//! Property tests for the structural invariants.

use harmonic_influence::analysis::{kendall_tau_b, spearman_rho};
use harmonic_influence::graph::{NodeId, WeightedFieldGraph};
use harmonic_influence::io::{load_graph, save_graph};
use harmonic_influence::mpa::{mpa_init, mpa_step};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph with randomized positive weights, driven by two seeds.
fn seeded_graph(n: u32, extra: usize, seed: u64) -> WeightedFieldGraph {
    let base = harmonic_influence::gen::gen_erdos_renyi(n, extra, 0.040, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let edges: Vec<(u32, u32, f64)> = base
        .edges()
        .map(|(i, j, _)| (i.0, j.0, rng.gen_range(0.1..10.0)))
        .collect();
    WeightedFieldGraph::build(n, edges).unwrap()
}

proptest! {
    #[test]
    fn save_then_load_is_identity(n in 2u32..25, extra in 0usize..40, seed in any::<u64>()) {
        let extra = extra.min(n as usize * (n as usize - 1) / 2);
        let g = seeded_graph(n, extra, seed);
        let file = tempfile::NamedTempFile::new().unwrap();
        save_graph(&g, file.path(), &[]).unwrap();
        let back = load_graph(file.path()).unwrap();
        prop_assert_eq!(back.n(), g.n());
        let a: Vec<_> = g.edges().collect();
        let b: Vec<_> = back.edges().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn weight_lookup_symmetric_and_degrees_consistent(
        n in 2u32..25,
        extra in 0usize..40,
        seed in any::<u64>(),
    ) {
        let extra = extra.min(n as usize * (n as usize - 1) / 2);
        let g = seeded_graph(n, extra, seed);
        for (i, j, w) in g.edges() {
            prop_assert_eq!(g.weight(j, i), Some(w));
        }
        for i in 0..=n {
            let i = NodeId(i);
            let total: f64 = g.neighbors(i).unwrap().map(|(_, w)| w).sum();
            prop_assert!((g.degree(i) - total).abs() <= 1e-12 * g.degree(i).max(1.0));
        }
    }

    #[test]
    fn rank_statistics_ignore_monotone_transforms(
        values in prop::collection::vec((0.1f64..100.0, 0.1f64..100.0), 2..40),
        scale in 0.01f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
        let y2: Vec<f64> = y.iter().map(|v| scale * v + shift).collect();
        prop_assert_eq!(kendall_tau_b(&x, &y), kendall_tau_b(&x, &y2));
        let a = spearman_rho(&x, &y);
        let b = spearman_rho(&x, &y2);
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn message_ranges_hold_for_any_round(
        n in 2u32..20,
        extra in 0usize..30,
        seed in any::<u64>(),
        rounds in 1usize..25,
    ) {
        let extra = extra.min(n as usize * (n as usize - 1) / 2);
        let g = seeded_graph(n, extra, seed);
        let mut s = mpa_init(&g);
        for _ in 0..rounds {
            s = mpa_step(&g, &s).unwrap();
        }
        for slot in g.slots(0) {
            prop_assert_eq!(s.w()[slot], 0.0);
            prop_assert_eq!(s.h()[slot], 0.0);
        }
        for i in 1..g.node_count() {
            for slot in g.slots(i) {
                prop_assert!(s.w()[slot] > 0.0 && s.w()[slot] <= 1.0);
                prop_assert!(s.h()[slot] >= 1.0);
            }
        }
    }
}
