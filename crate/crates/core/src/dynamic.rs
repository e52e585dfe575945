//! Topology changes applied to a running message state.
//!
//! When the network changes once at round T, messages on surviving edges
//! keep their values, messages on removed edges are dropped, and messages
//! on new edges restart from (1, 1) — null from the field, as always. The
//! run then simply continues on the new graph.

use crate::error::{Error, Result};
use crate::exact::InfluenceProfile;
use crate::graph::WeightedFieldGraph;
use crate::mpa::{estimate_all, mpa_init, mpa_run, ConvergenceTrace, MessageState, StoppingConfig};
use serde::Serialize;
use std::collections::BTreeSet;

type EdgeKey = (u32, u32);

/// A single topology change: the replacement graph plus the round it is
/// applied at, with the edge bookkeeping precomputed.
#[derive(Debug, Clone)]
pub struct TopologyChange {
    pub new_graph: WeightedFieldGraph,
    pub applied_at: u64,
    retained: BTreeSet<EdgeKey>,
    dropped: BTreeSet<EdgeKey>,
    added: BTreeSet<EdgeKey>,
}

impl TopologyChange {
    pub fn between(
        old: &WeightedFieldGraph,
        new_graph: WeightedFieldGraph,
        applied_at: u64,
    ) -> Self {
        let old_edges: BTreeSet<EdgeKey> = old.edges().map(|(i, j, _)| (i.0, j.0)).collect();
        let new_edges: BTreeSet<EdgeKey> = new_graph.edges().map(|(i, j, _)| (i.0, j.0)).collect();
        TopologyChange {
            new_graph,
            applied_at,
            retained: old_edges.intersection(&new_edges).copied().collect(),
            dropped: old_edges.difference(&new_edges).copied().collect(),
            added: new_edges.difference(&old_edges).copied().collect(),
        }
    }

    /// Edges present before and after; their messages carry over even when
    /// the edge weight changed.
    pub fn retained(&self) -> &BTreeSet<EdgeKey> {
        &self.retained
    }

    pub fn dropped(&self) -> &BTreeSet<EdgeKey> {
        &self.dropped
    }

    pub fn added(&self) -> &BTreeSet<EdgeKey> {
        &self.added
    }

    pub fn is_noop(&self) -> bool {
        self.dropped.is_empty() && self.added.is_empty()
    }
}

/// Rekeys a message state from `old_g` to the change's new graph.
///
/// Both orientations of every retained edge keep their values, dropped
/// orientations disappear, added orientations start at (1, 1) for non-field
/// origins and (0, 0) for field origins. The round counter is preserved.
pub fn apply_change(
    old_g: &WeightedFieldGraph,
    s: &MessageState,
    chg: &TopologyChange,
) -> Result<MessageState> {
    if !s.matches(old_g) {
        return Err(Error::KeyMismatch);
    }
    let new_g = &chg.new_graph;
    let mut w = vec![0.0; new_g.slot_count()];
    let mut h = vec![0.0; new_g.slot_count()];
    for i in 0..new_g.node_count() {
        for slot in new_g.slots(i) {
            let j = new_g.slot_target(slot);
            match old_g.slot_of(crate::graph::NodeId(i as u32), j) {
                Some(old_slot) => {
                    w[slot] = s.w()[old_slot];
                    h[slot] = s.h()[old_slot];
                }
                None => {
                    let init = if i == 0 { 0.0 } else { 1.0 };
                    w[slot] = init;
                    h[slot] = init;
                }
            }
        }
    }
    Ok(MessageState::from_parts(new_g, w, h, s.t()))
}

/// Outcome of one changed-network experiment, compared against a fresh
/// restart on the final network.
#[derive(Debug, Clone, Serialize)]
pub struct ChangeReport {
    /// Rounds from the change to convergence.
    pub post_change_rounds: u64,
    /// Rounds a fresh run on the new graph needs.
    pub fresh_rounds: u64,
    /// Sup-norm gap between the two converged W maps.
    pub w_gap: f64,
    /// Largest relative gap between the two converged estimate vectors.
    pub h_gap: f64,
}

/// Everything produced by [`run_change_experiment`].
#[derive(Debug)]
pub struct ChangeExperiment {
    pub report: ChangeReport,
    /// Run on the original graph up to the change.
    pub before_trace: ConvergenceTrace,
    /// Continuation on the new graph after the change.
    pub post_trace: ConvergenceTrace,
    /// Fresh run on the new graph from the standard start.
    pub fresh_trace: ConvergenceTrace,
    pub changed_state: MessageState,
    pub fresh_state: MessageState,
    pub changed_estimates: InfluenceProfile,
    pub fresh_estimates: InfluenceProfile,
}

/// Runs to convergence on `g_before`, applies the change to `g_after`,
/// continues to convergence, and also runs `g_after` from scratch.
pub fn run_change_experiment(
    g_before: &WeightedFieldGraph,
    g_after: &WeightedFieldGraph,
    cfg: &StoppingConfig,
) -> Result<ChangeExperiment> {
    let (settled, before_trace) = mpa_run(g_before, mpa_init(g_before), cfg)?;
    let chg = TopologyChange::between(g_before, g_after.clone(), settled.t());
    let carried = apply_change(g_before, &settled, &chg)?;
    let (changed_state, post_trace) = mpa_run(g_after, carried, cfg)?;
    let (fresh_state, fresh_trace) = mpa_run(g_after, mpa_init(g_after), cfg)?;

    let mut w_gap = 0.0f64;
    for (a, b) in changed_state.w().iter().zip(fresh_state.w()) {
        w_gap = w_gap.max((a - b).abs());
    }
    let changed_estimates = estimate_all(g_after, &changed_state)?;
    let fresh_estimates = estimate_all(g_after, &fresh_state)?;
    let mut h_gap = 0.0f64;
    for ((_, a), (_, b)) in changed_estimates.iter().zip(fresh_estimates.iter()) {
        h_gap = h_gap.max((a - b).abs() / b.abs().max(1.0));
    }

    Ok(ChangeExperiment {
        report: ChangeReport {
            post_change_rounds: post_trace.stop_round,
            fresh_rounds: fresh_trace.stop_round,
            w_gap,
            h_gap,
        },
        before_trace,
        post_trace,
        fresh_trace,
        changed_state,
        fresh_state,
        changed_estimates,
        fresh_estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_erdos_renyi, wheel_pair};
    use crate::graph::{NodeId, FIELD};
    use crate::mpa::mpa_step;
    use rand::SeedableRng;

    fn path_f12() -> WeightedFieldGraph {
        WeightedFieldGraph::build(2, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn noop_change_is_identity() {
        let g = gen_erdos_renyi(10, 20, 0.1, 1).unwrap();
        let (s, _) = mpa_run(&g, mpa_init(&g), &StoppingConfig::default()).unwrap();
        let chg = TopologyChange::between(&g, g.clone(), s.t());
        assert!(chg.is_noop());
        let s2 = apply_change(&g, &s, &chg).unwrap();
        assert_eq!(s.w(), s2.w());
        assert_eq!(s.h(), s2.h());
        assert_eq!(s.t(), s2.t());
    }

    #[test]
    fn hand_example_add_field_edge_to_path() {
        let g = path_f12();
        let (s, _) = mpa_run(&g, mpa_init(&g), &StoppingConfig::default()).unwrap();
        let bigger = WeightedFieldGraph::build(2, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let chg = TopologyChange::between(&g, bigger.clone(), s.t());
        assert_eq!(chg.added().len(), 1);
        assert_eq!(chg.retained().len(), 2);
        let s2 = apply_change(&g, &s, &chg).unwrap();
        let slot = |i: u32, j: u32| bigger.slot_of(NodeId(i), NodeId(j)).unwrap();
        assert_eq!(s2.w()[slot(2, 0)], 1.0);
        assert_eq!(s2.h()[slot(2, 0)], 1.0);
        assert_eq!(s2.w()[slot(0, 2)], 0.0);
        assert_eq!(s2.w()[slot(1, 2)], 0.5); // converged value carried over
        assert_eq!(s2.t(), s.t());
    }

    #[test]
    fn change_sets_partition_edges() {
        let (g3, g4) = wheel_pair(50, 0.05, 0.25, 0.040, 5).unwrap();
        let chg = TopologyChange::between(&g3, g4.clone(), 0);
        let e3: BTreeSet<EdgeKey> = g3.edges().map(|(i, j, _)| (i.0, j.0)).collect();
        let e4: BTreeSet<EdgeKey> = g4.edges().map(|(i, j, _)| (i.0, j.0)).collect();
        let retained_or_dropped: BTreeSet<EdgeKey> =
            chg.retained().union(chg.dropped()).copied().collect();
        assert_eq!(retained_or_dropped, e3);
        let retained_or_added: BTreeSet<EdgeKey> =
            chg.retained().union(chg.added()).copied().collect();
        assert_eq!(retained_or_added, e4);
    }

    #[test]
    fn applying_twice_equals_applying_once() {
        let g = gen_erdos_renyi(12, 24, 0.1, 2).unwrap();
        let h = gen_erdos_renyi(12, 30, 0.1, 3).unwrap();
        let (s, _) = mpa_run(&g, mpa_init(&g), &StoppingConfig::default()).unwrap();
        let chg = TopologyChange::between(&g, h.clone(), s.t());
        let once = apply_change(&g, &s, &chg).unwrap();
        let again =
            apply_change(&h, &once, &TopologyChange::between(&h, h.clone(), once.t())).unwrap();
        assert_eq!(once.w(), again.w());
        assert_eq!(once.h(), again.h());
    }

    #[test]
    fn state_invariants_hold_after_change() {
        let (g3, g4) = wheel_pair(50, 0.05, 0.25, 0.040, 7).unwrap();
        let (s, _) = mpa_run(&g3, mpa_init(&g3), &StoppingConfig::default()).unwrap();
        let chg = TopologyChange::between(&g3, g4.clone(), s.t());
        let carried = apply_change(&g3, &s, &chg).unwrap();
        assert!(carried.matches(&g4));
        for slot in g4.slots(0) {
            assert_eq!(carried.w()[slot], 0.0);
            assert_eq!(carried.h()[slot], 0.0);
        }
        for i in 1..g4.node_count() {
            for slot in g4.slots(i) {
                assert!(carried.w()[slot] > 0.0 && carried.w()[slot] <= 1.0);
                assert!(carried.h()[slot] >= 1.0);
            }
        }
        // the carried state must step cleanly on the new graph
        assert!(mpa_step(&g4, &carried).is_ok());
        // and the old graph must reject it
        assert!(matches!(mpa_step(&g3, &carried), Err(Error::KeyMismatch)));
    }

    #[test]
    fn change_can_add_and_remove_nodes() {
        // a node enters the network: the new edges start fresh
        let small = path_f12();
        let grown =
            WeightedFieldGraph::build(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 3, 0.5), (2, 3, 1.0)])
                .unwrap();
        let (s, _) = mpa_run(&small, mpa_init(&small), &StoppingConfig::default()).unwrap();
        let chg = TopologyChange::between(&small, grown.clone(), s.t());
        let carried = apply_change(&small, &s, &chg).unwrap();
        assert!(carried.matches(&grown));
        let slot = |i: u32, j: u32| grown.slot_of(NodeId(i), NodeId(j)).unwrap();
        assert_eq!(carried.w()[slot(3, 2)], 1.0);
        assert_eq!(carried.w()[slot(0, 3)], 0.0);
        assert_eq!(carried.w()[slot(1, 2)], 0.5);

        // and leaves again: messages on its edges disappear
        let back = TopologyChange::between(&grown, small.clone(), carried.t());
        let shrunk = apply_change(&grown, &carried, &back).unwrap();
        assert!(shrunk.matches(&small));
        assert_eq!(
            shrunk.w()[small.slot_of(NodeId(1), NodeId(2)).unwrap()],
            0.5
        );
    }

    #[test]
    fn mismatched_state_rejected() {
        let g = path_f12();
        let other = gen_erdos_renyi(5, 8, 0.1, 0).unwrap();
        let s = mpa_init(&other);
        let chg = TopologyChange::between(&g, g.clone(), 0);
        assert!(matches!(
            apply_change(&g, &s, &chg),
            Err(Error::KeyMismatch)
        ));
    }

    #[test]
    fn identical_before_after_converges_immediately() {
        let g = gen_erdos_renyi(15, 35, 0.1, 4).unwrap();
        let out = run_change_experiment(&g, &g, &StoppingConfig::default()).unwrap();
        assert!(out.report.post_change_rounds <= 2);
        assert!(out.report.w_gap <= 1e-9);
    }

    #[test]
    fn changed_run_forgets_the_initial_network() {
        // ensemble version of the wheel experiment: the converged state on
        // the changed network matches a fresh run on the final network
        let cfg = StoppingConfig::default();
        for seed in 0..20 {
            let (g3, g4) = wheel_pair(50, 0.01, 0.25, 0.040, 1000 + seed).unwrap();
            let out = run_change_experiment(&g3, &g4, &cfg).unwrap();
            assert!(
                out.report.w_gap <= 1e-7,
                "seed {seed}: w_gap {}",
                out.report.w_gap
            );
            assert!(
                out.report.h_gap <= 1e-6,
                "seed {seed}: h_gap {}",
                out.report.h_gap
            );
        }
    }

    #[test]
    fn uniqueness_probe_reports_findings() {
        // the unique-equilibrium conjecture is probed, not asserted:
        // disagreements are printed as findings
        let cfg = StoppingConfig {
            eps_w: 1e-12,
            eps_h: 1e-11,
            max_rounds: 500_000,
        };
        let mut findings = 0;
        for seed in 0..4 {
            let g =
                gen_erdos_renyi(10 + 5 * seed as u32, 30 + 5 * seed as usize, 0.1, seed).unwrap();
            let (reference, _) = mpa_run(&g, mpa_init(&g), &cfg).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(777 + seed);
            for trial in 0..10 {
                let start = MessageState::random_init(&g, &mut rng);
                let (settled, trace) = mpa_run(&g, start, &cfg).unwrap();
                let gap = settled
                    .w()
                    .iter()
                    .zip(reference.w())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if gap > 1e-7 {
                    findings += 1;
                    println!(
                        "FINDING: seed {seed} trial {trial}: W fixed point differs by {gap:.3e} \
                         (stop: {:?})",
                        trace.stop_reason
                    );
                }
            }
        }
        if findings == 0 {
            println!("uniqueness probe: all restarts reached the same W fixed point");
        }
    }

    #[test]
    fn field_messages_on_added_field_edges_stay_null() {
        // removing and re-adding an edge touching the field must not leak a
        // non-null field message
        let tri = WeightedFieldGraph::build(2, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let path = path_f12();
        let (s, _) = mpa_run(&tri, mpa_init(&tri), &StoppingConfig::default()).unwrap();
        let shrink = TopologyChange::between(&tri, path.clone(), s.t());
        assert_eq!(
            shrink.dropped().iter().copied().collect::<Vec<_>>(),
            vec![(0, 2)]
        );
        let small = apply_change(&tri, &s, &shrink).unwrap();
        assert!(small.matches(&path));
        let grow = TopologyChange::between(&path, tri.clone(), small.t());
        let big = apply_change(&path, &small, &grow).unwrap();
        let slot = |i: u32, j: u32| tri.slot_of(NodeId(i), NodeId(j)).unwrap();
        assert_eq!(big.w()[slot(0, 2)], 0.0);
        assert_eq!(big.h()[slot(0, 2)], 0.0);
        assert_eq!(big.w()[slot(2, 0)], 1.0);
        let _ = FIELD;
    }
}
