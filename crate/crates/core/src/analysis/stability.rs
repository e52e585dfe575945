//! Local stability of the converged W messages.
//!
//! The W update is autonomous, so its linearization at the fixed point
//! decides local stability. The Jacobian entry for output (i -> j) and
//! input (k -> i) with k in N_i \ {j} is (C_ik / C_ij) * W'(i -> j)^2,
//! zero elsewhere; rows and columns of field-origin messages are zero
//! because those coordinates are frozen. The H update is affine in H given
//! W, so its propagation matrix M[(i -> j), (k -> i)] = W(k -> i) at the
//! fixed point must be a contraction as well; both spectral radii are
//! estimated by power iteration on matrix-free operators (non-negative, so
//! a positive start vector converges to the Perron value).

use crate::error::{Error, Result};
use crate::graph::WeightedFieldGraph;
use crate::mpa::{w_update_map, MessageState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Residual bound under which a state counts as a fixed point.
const FIXED_POINT_TOL: f64 = 1e-9;
const POWER_TOL: f64 = 1e-6;
const POWER_MAX_ITER: usize = 5000;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Spectral radius of the linearized W update.
    pub spectral_radius: f64,
    /// Spectral radius of the H propagation matrix.
    pub h_spectral_radius: f64,
    /// True when both radii are below 1.
    pub stable: bool,
    pub w_power_converged: bool,
    pub h_power_converged: bool,
    pub w_power_iterations: usize,
    pub h_power_iterations: usize,
}

/// Probes local stability at a converged state.
pub fn stability_probe(g: &WeightedFieldGraph, s_fixed: &MessageState) -> Result<StabilityReport> {
    if !s_fixed.matches(g) {
        return Err(Error::KeyMismatch);
    }
    let w_star = w_update_map(g, s_fixed.w());
    let residual = w_star
        .iter()
        .zip(s_fixed.w())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if residual > FIXED_POINT_TOL {
        return Err(Error::NotAFixedPoint(residual));
    }

    let dim = g.slot_count();
    let w_op = |v: &[f64], out: &mut [f64]| w_jacobian_apply(g, &w_star, v, out);
    let (w_radius, w_conv, w_iters) = power_iteration(&w_op, dim, 0xACC0);
    let h_op = |v: &[f64], out: &mut [f64]| h_propagation_apply(g, s_fixed.w(), v, out);
    let (h_radius, h_conv, h_iters) = power_iteration(&h_op, dim, 0xACC1);

    Ok(StabilityReport {
        spectral_radius: w_radius,
        h_spectral_radius: h_radius,
        stable: w_radius < 1.0 && h_radius < 1.0,
        w_power_converged: w_conv,
        h_power_converged: h_conv,
        w_power_iterations: w_iters,
        h_power_iterations: h_iters,
    })
}

/// Jacobian-vector product of the W update at the point whose image is
/// `w_image` (pass the updated messages, i.e. F(w)).
pub(crate) fn w_jacobian_apply(
    g: &WeightedFieldGraph,
    w_image: &[f64],
    v: &[f64],
    out: &mut [f64],
) {
    for slot in g.slots(0) {
        out[slot] = 0.0;
    }
    for i in 1..g.node_count() {
        for slot in g.slots(i) {
            let c_ij = g.slot_weight(slot);
            let mut acc = 0.0;
            for other in g.slots(i) {
                if other == slot || g.slot_target(other).is_field() {
                    continue;
                }
                acc += g.slot_weight(other) / c_ij * v[g.slot_rev(other)];
            }
            out[slot] = w_image[slot] * w_image[slot] * acc;
        }
    }
}

fn h_propagation_apply(g: &WeightedFieldGraph, w_star: &[f64], v: &[f64], out: &mut [f64]) {
    for slot in g.slots(0) {
        out[slot] = 0.0;
    }
    for i in 1..g.node_count() {
        for slot in g.slots(i) {
            let mut acc = 0.0;
            for other in g.slots(i) {
                if other == slot || g.slot_target(other).is_field() {
                    continue;
                }
                let r = g.slot_rev(other);
                acc += w_star[r] * v[r];
            }
            out[slot] = acc;
        }
    }
}

/// Power iteration for the spectral radius of a non-negative operator.
/// Returns (radius, converged, iterations). A vanishing iterate means the
/// operator is nilpotent along this orbit and the radius is reported as 0.
fn power_iteration<F>(op: &F, dim: usize, seed: u64) -> (f64, bool, usize)
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return (0.0, true, 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() + 0.1).collect();
    let norm = l2(&v);
    for x in &mut v {
        *x /= norm;
    }
    let mut out = vec![0.0; dim];
    let mut lambda = 0.0f64;
    let mut steady = 0;
    for it in 1..=POWER_MAX_ITER {
        op(&v, &mut out);
        let growth = l2(&out);
        if growth == 0.0 {
            return (0.0, true, it);
        }
        for (vi, oi) in v.iter_mut().zip(&out) {
            *vi = oi / growth;
        }
        if (growth - lambda).abs() <= POWER_TOL * growth.max(1e-30) {
            steady += 1;
            if steady >= 3 && it >= 10 {
                return (growth, true, it);
            }
        } else {
            steady = 0;
        }
        lambda = growth;
    }
    (lambda, false, POWER_MAX_ITER)
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Compares the analytic Jacobian-vector product against a forward
/// difference of the W update map. Returns the relative error.
pub fn finite_difference_check(g: &WeightedFieldGraph, s_fixed: &MessageState, seed: u64) -> f64 {
    const EPS: f64 = 1e-7;
    let dim = g.slot_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    for slot in g.slots(0) {
        v[slot] = 0.0; // frozen coordinates
    }
    let norm = l2(&v);
    for x in &mut v {
        *x /= norm;
    }

    let base = s_fixed.w();
    let image = w_update_map(g, base);
    let mut analytic = vec![0.0; dim];
    w_jacobian_apply(g, &image, &v, &mut analytic);

    let perturbed: Vec<f64> = base.iter().zip(&v).map(|(w, d)| w + EPS * d).collect();
    let shifted = w_update_map(g, &perturbed);
    let fd: Vec<f64> = shifted
        .iter()
        .zip(&image)
        .map(|(a, b)| (a - b) / EPS)
        .collect();

    let mut diff = 0.0;
    for (a, b) in analytic.iter().zip(&fd) {
        diff += (a - b) * (a - b);
    }
    diff.sqrt() / l2(&analytic).max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_erdos_renyi, gen_random_tree};
    use crate::mpa::{mpa_init, mpa_run, StoppingConfig};

    fn converged(g: &WeightedFieldGraph) -> MessageState {
        let cfg = StoppingConfig {
            eps_w: 1e-12,
            eps_h: 1e-10,
            max_rounds: 500_000,
        };
        mpa_run(g, mpa_init(g), &cfg).unwrap().0
    }

    #[test]
    fn tree_fixed_point_is_nilpotent() {
        let g = gen_random_tree(20, 0.2, 4.0, 1).unwrap();
        let s = converged(&g);
        let report = stability_probe(&g, &s).unwrap();
        assert!(report.spectral_radius < 1e-9);
        assert!(report.stable);
    }

    #[test]
    fn path_jacobian_is_nilpotent_by_hand() {
        // on f-1-2 the only derivative row of W(1->2) reads the frozen
        // field input, so the operator annihilates everything
        let g = WeightedFieldGraph::build(2, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = converged(&g);
        let report = stability_probe(&g, &s).unwrap();
        assert_eq!(report.spectral_radius, 0.0);
    }

    #[test]
    fn random_graphs_are_locally_stable() {
        for seed in 0..5 {
            let g = gen_erdos_renyi(20, 45, 0.1, 60 + seed).unwrap();
            let s = converged(&g);
            let report = stability_probe(&g, &s).unwrap();
            assert!(
                report.spectral_radius < 1.0,
                "seed {seed}: W radius {}",
                report.spectral_radius
            );
            assert!(
                report.h_spectral_radius < 1.0,
                "seed {seed}: H radius {}",
                report.h_spectral_radius
            );
            assert!(report.stable);
        }
    }

    #[test]
    fn finite_difference_agrees() {
        for seed in 0..5 {
            let g = gen_erdos_renyi(15, 35, 0.1, 80 + seed).unwrap();
            let s = converged(&g);
            let err = finite_difference_check(&g, &s, seed);
            assert!(err < 1e-4, "seed {seed}: fd error {err}");
        }
    }

    #[test]
    fn jacobian_row_sums_match_structure() {
        // J * 1 restricted to non-field inputs equals
        // W'^2 * sum_k C_ik / C_ij per row
        let g = gen_erdos_renyi(12, 30, 0.1, 3).unwrap();
        let s = converged(&g);
        let image = w_update_map(&g, s.w());
        let ones = vec![1.0; g.slot_count()];
        let mut out = vec![0.0; g.slot_count()];
        w_jacobian_apply(&g, &image, &ones, &mut out);
        for i in 1..g.node_count() {
            for slot in g.slots(i) {
                let c_ij = g.slot_weight(slot);
                let mut expect = 0.0;
                for other in g.slots(i) {
                    if other == slot || g.slot_target(other).is_field() {
                        continue;
                    }
                    expect += g.slot_weight(other) / c_ij;
                }
                expect *= image[slot] * image[slot];
                assert!((out[slot] - expect).abs() <= 1e-12 * expect.max(1.0));
                assert!(out[slot] >= 0.0);
            }
        }
        for slot in g.slots(0) {
            assert_eq!(out[slot], 0.0);
        }
        // leaf-origin rows are zero: their only neighbor is the target
        let leafy = WeightedFieldGraph::build(2, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s2 = converged(&leafy);
        let image2 = w_update_map(&leafy, s2.w());
        let mut out2 = vec![0.0; leafy.slot_count()];
        w_jacobian_apply(&leafy, &image2, &vec![1.0; leafy.slot_count()], &mut out2);
        let leaf_slot = leafy
            .slot_of(crate::graph::NodeId(2), crate::graph::NodeId(1))
            .unwrap();
        assert_eq!(out2[leaf_slot], 0.0);
    }

    #[test]
    fn non_fixed_point_rejected() {
        let g = gen_erdos_renyi(10, 25, 0.1, 5).unwrap();
        let s = mpa_init(&g);
        assert!(matches!(
            stability_probe(&g, &s),
            Err(Error::NotAFixedPoint(_))
        ));
    }
}
