//! The synchronous message passing algorithm.
//!
//! Every directed edge (i -> j) carries two messages. From the standard
//! start W = H = 1 on non-field origins, each round recomputes
//!
//! ```text
//! W'(i->j) = ( 1 + sum_{k in N_i \ {j}} (C_ik / C_ij) (1 - W(k->i)) )^-1
//! H'(i->j) = 1 + sum_{k in N_i \ {j}} W(k->i) H(k->i)
//! ```
//!
//! from the previous round's values only; the field node sends null
//! messages forever. Node l reads off the influence estimate
//! `1 + sum_{i in N_l} W(i->l) H(i->l)`.
//!
//! A round is O(m): per node the full neighbor aggregates are computed
//! once and each outgoing message subtracts its own term. The naive
//! per-edge double loop is kept as a reference for equivalence tests.

use crate::error::{Error, Result};
use crate::exact::InfluenceProfile;
use crate::graph::{NodeId, WeightedFieldGraph};
use serde::Serialize;

/// W and H messages for every directed edge slot of a graph, plus the
/// round counter.
#[derive(Debug, Clone)]
pub struct MessageState {
    w: Vec<f64>,
    h: Vec<f64>,
    t: u64,
    fingerprint: u64,
}

impl MessageState {
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Whether this state is keyed by `g`'s directed edges.
    pub fn matches(&self, g: &WeightedFieldGraph) -> bool {
        self.fingerprint == g.fingerprint() && self.w.len() == g.slot_count()
    }

    pub(crate) fn from_parts(g: &WeightedFieldGraph, w: Vec<f64>, h: Vec<f64>, t: u64) -> Self {
        debug_assert_eq!(w.len(), g.slot_count());
        debug_assert_eq!(h.len(), g.slot_count());
        MessageState {
            w,
            h,
            t,
            fingerprint: g.fingerprint(),
        }
    }

    /// Random initial condition for the convergence-from-anywhere probes:
    /// W uniform in (0, 1], H uniform in [1, n], null field messages.
    pub fn random_init(g: &WeightedFieldGraph, rng: &mut impl rand::Rng) -> Self {
        let mut s = mpa_init(g);
        let n = g.n() as f64;
        for i in 1..g.node_count() {
            for slot in g.slots(i) {
                s.w[slot] = 1.0 - rng.gen::<f64>();
                s.h[slot] = 1.0 + rng.gen::<f64>() * (n - 1.0).max(0.0);
            }
        }
        s.t = 0;
        s
    }
}

/// Standard initialization: (W, H) = (1, 1) on non-field origins, null
/// messages from the field, t = 0.
pub fn mpa_init(g: &WeightedFieldGraph) -> MessageState {
    let mut w = vec![1.0; g.slot_count()];
    let mut h = vec![1.0; g.slot_count()];
    for slot in g.slots(0) {
        w[slot] = 0.0;
        h[slot] = 0.0;
    }
    MessageState::from_parts(g, w, h, 0)
}

/// One synchronous round using the per-node aggregate form.
fn step_into(g: &WeightedFieldGraph, src: &MessageState, dst: &mut MessageState) {
    for slot in g.slots(0) {
        dst.w[slot] = 0.0;
        dst.h[slot] = 0.0;
    }
    for i in 1..g.node_count() {
        let mut s_agg = 0.0;
        let mut t_agg = 0.0;
        for slot in g.slots(i) {
            let r = g.slot_rev(slot);
            s_agg += g.slot_weight(slot) * (1.0 - src.w[r]);
            t_agg += src.w[r] * src.h[r];
        }
        for slot in g.slots(i) {
            let r = g.slot_rev(slot);
            let c = g.slot_weight(slot);
            let w_in = src.w[r];
            let h_in = src.h[r];
            // Exact sums are non-negative; clamp cancellation noise.
            let w_sum = (s_agg - c * (1.0 - w_in)).max(0.0);
            let h_sum = (t_agg - w_in * h_in).max(0.0);
            dst.w[slot] = 1.0 / (1.0 + w_sum / c);
            dst.h[slot] = 1.0 + h_sum;
        }
    }
    dst.t = src.t + 1;
    dst.fingerprint = src.fingerprint;
}

/// One synchronous round. The state must be keyed by `g`'s directed edges.
pub fn mpa_step(g: &WeightedFieldGraph, s: &MessageState) -> Result<MessageState> {
    if !s.matches(g) {
        return Err(Error::KeyMismatch);
    }
    let mut dst = s.clone();
    step_into(g, s, &mut dst);
    Ok(dst)
}

/// New value of one directed message computed straight from the update
/// rules, summing neighbors in ascending id order.
fn naive_message(
    g: &WeightedFieldGraph,
    s: &MessageState,
    origin: usize,
    slot: usize,
) -> (f64, f64) {
    if origin == 0 {
        return (0.0, 0.0);
    }
    let c_ij = g.slot_weight(slot);
    let mut w_sum = 0.0;
    let mut h_sum = 0.0;
    for other in g.slots(origin) {
        if other == slot {
            continue;
        }
        let r = g.slot_rev(other);
        w_sum += g.slot_weight(other) / c_ij * (1.0 - s.w[r]);
        h_sum += s.w[r] * s.h[r];
    }
    (1.0 / (1.0 + w_sum), 1.0 + h_sum)
}

/// Reference implementation of one round: the O(sum deg^2) double loop.
pub fn mpa_step_naive(g: &WeightedFieldGraph, s: &MessageState) -> Result<MessageState> {
    if !s.matches(g) {
        return Err(Error::KeyMismatch);
    }
    let mut dst = s.clone();
    for i in 0..g.node_count() {
        for slot in g.slots(i) {
            let (w, h) = naive_message(g, s, i, slot);
            dst.w[slot] = w;
            dst.h[slot] = h;
        }
    }
    dst.t = s.t + 1;
    Ok(dst)
}

/// Influence estimate for one leader on the current round's messages.
pub fn estimate(g: &WeightedFieldGraph, s: &MessageState, leader: NodeId) -> Result<f64> {
    if leader.is_field() {
        return Err(Error::FieldAsLeader);
    }
    if !g.contains(leader) {
        return Err(Error::UnknownNode(leader));
    }
    if !s.matches(g) {
        return Err(Error::KeyMismatch);
    }
    Ok(estimate_unchecked(g, s, leader.index()))
}

#[inline]
fn estimate_unchecked(g: &WeightedFieldGraph, s: &MessageState, leader: usize) -> f64 {
    let mut acc = 1.0;
    for slot in g.slots(leader) {
        let r = g.slot_rev(slot);
        acc += s.w[r] * s.h[r];
    }
    acc
}

fn estimates_into(g: &WeightedFieldGraph, s: &MessageState, out: &mut Vec<f64>) {
    out.clear();
    for l in 1..g.node_count() {
        out.push(estimate_unchecked(g, s, l));
    }
}

/// Influence estimates for all leaders.
pub fn estimate_all(g: &WeightedFieldGraph, s: &MessageState) -> Result<InfluenceProfile> {
    if !s.matches(g) {
        return Err(Error::KeyMismatch);
    }
    let mut values = Vec::with_capacity(g.n() as usize);
    estimates_into(g, s, &mut values);
    Ok(InfluenceProfile::mpa_estimate(values, s.t))
}

/// Stopping thresholds for [`mpa_run`]: the run ends once the largest
/// per-round W change and the largest relative estimate change both fall
/// below their thresholds, or after `max_rounds` rounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StoppingConfig {
    pub eps_w: f64,
    pub eps_h: f64,
    pub max_rounds: u64,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig {
            eps_w: 1e-10,
            eps_h: 1e-9,
            max_rounds: 200_000,
        }
    }
}

impl StoppingConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps_w > 0.0) || !(self.eps_h > 0.0) || self.max_rounds < 1 {
            return Err(Error::InvalidConfig(format!(
                "eps_w={}, eps_h={}, max_rounds={}",
                self.eps_w, self.eps_h, self.max_rounds
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxRounds,
}

/// Distances of one round's state to the run's final state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRecord {
    /// Rounds elapsed since the start of this run.
    pub t: u64,
    /// Sup-norm distance of the W messages to their final values.
    pub d_w: f64,
    /// Sup-norm distance of the estimate vector to the final estimates.
    pub d_h: f64,
}

/// Round-by-round record of a run. Distances are to the final state and are
/// backfilled by replaying the (deterministic) run once it has stopped.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    /// One record per round from t = 0 through `stop_round`.
    pub records: Vec<TraceRecord>,
    pub stop_round: u64,
    pub stop_reason: StopReason,
    /// First round from which the W distance stays below eps_w.
    pub w_convergence_round: u64,
    /// First round from which the relative estimate distance stays below
    /// eps_h.
    pub h_convergence_round: u64,
    /// Largest single-round increase of any W message (negative when the
    /// whole run was non-increasing, as the standard start guarantees).
    pub max_w_increase: f64,
}

/// Runs the algorithm from `s0` until both stopping criteria hold or
/// `max_rounds` is hit. Non-convergence is reported through
/// `stop_reason`, never as an error.
pub fn mpa_run(
    g: &WeightedFieldGraph,
    s0: MessageState,
    cfg: &StoppingConfig,
) -> Result<(MessageState, ConvergenceTrace)> {
    cfg.validate()?;
    if !s0.matches(g) {
        return Err(Error::KeyMismatch);
    }

    let initial = s0.clone();
    let mut cur = s0;
    let mut next = cur.clone();
    let mut est_cur = Vec::new();
    let mut est_next = Vec::new();
    estimates_into(g, &cur, &mut est_cur);

    let mut max_w_increase = f64::NEG_INFINITY;
    let mut rounds: u64 = 0;
    let stop_reason;
    loop {
        step_into(g, &cur, &mut next);
        let mut w_delta = 0.0f64;
        for (new, old) in next.w.iter().zip(&cur.w) {
            let diff = new - old;
            w_delta = w_delta.max(diff.abs());
            max_w_increase = max_w_increase.max(diff);
        }
        estimates_into(g, &next, &mut est_next);
        let mut h_delta = 0.0f64;
        for (new, old) in est_next.iter().zip(&est_cur) {
            h_delta = h_delta.max((new - old).abs() / new.abs().max(1.0));
        }
        std::mem::swap(&mut cur, &mut next);
        std::mem::swap(&mut est_cur, &mut est_next);
        rounds += 1;
        if w_delta < cfg.eps_w && h_delta < cfg.eps_h {
            stop_reason = StopReason::Tolerance;
            break;
        }
        if rounds >= cfg.max_rounds {
            stop_reason = StopReason::MaxRounds;
            break;
        }
    }
    let final_state = cur;
    let final_est = est_cur;

    // Replay the run to record distances to the final state.
    let mut records = Vec::with_capacity(rounds as usize + 1);
    let mut d_h_rel = Vec::with_capacity(rounds as usize + 1);
    let mut replay = initial;
    let mut replay_next = replay.clone();
    let mut est = Vec::new();
    for t in 0..=rounds {
        let mut d_w = 0.0f64;
        for (v, fv) in replay.w.iter().zip(&final_state.w) {
            d_w = d_w.max((v - fv).abs());
        }
        estimates_into(g, &replay, &mut est);
        let mut d_h = 0.0f64;
        let mut rel = 0.0f64;
        for (v, fv) in est.iter().zip(&final_est) {
            let diff = (v - fv).abs();
            d_h = d_h.max(diff);
            rel = rel.max(diff / fv.abs().max(1.0));
        }
        records.push(TraceRecord { t, d_w, d_h });
        d_h_rel.push(rel);
        if t < rounds {
            step_into(g, &replay, &mut replay_next);
            std::mem::swap(&mut replay, &mut replay_next);
        }
    }

    let first_sustained = |below: &dyn Fn(usize) -> bool| -> u64 {
        let mut first = rounds;
        for t in (0..=rounds as usize).rev() {
            if below(t) {
                first = t as u64;
            } else {
                break;
            }
        }
        first
    };
    let w_convergence_round = first_sustained(&|t| records[t].d_w <= cfg.eps_w);
    let h_convergence_round = first_sustained(&|t| d_h_rel[t] <= cfg.eps_h);

    let trace = ConvergenceTrace {
        records,
        stop_round: rounds,
        stop_reason,
        w_convergence_round,
        h_convergence_round,
        max_w_increase,
    };
    Ok((final_state, trace))
}

/// The autonomous W-update map (H plays no role in it), with field-origin
/// coordinates frozen at zero. Used by the fixed-point stability probe.
pub fn w_update_map(g: &WeightedFieldGraph, w: &[f64]) -> Vec<f64> {
    assert_eq!(w.len(), g.slot_count());
    let mut out = vec![0.0; w.len()];
    for i in 1..g.node_count() {
        for slot in g.slots(i) {
            let c_ij = g.slot_weight(slot);
            let mut sum = 0.0;
            for other in g.slots(i) {
                if other == slot {
                    continue;
                }
                sum += g.slot_weight(other) / c_ij * (1.0 - w[g.slot_rev(other)]);
            }
            out[slot] = 1.0 / (1.0 + sum);
        }
    }
    out
}
