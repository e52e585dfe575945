//! Convergence-time sweeps over graph families, for the m/n scaling
//! conjecture.

use crate::error::Result;
use crate::gen;
use crate::mpa::{mpa_init, mpa_run, StoppingConfig};
use serde::Serialize;

/// One point of a sweep: a graph family instance to sample with several
/// seeds.
#[derive(Debug, Clone)]
pub enum FamilyPoint {
    /// G(n, m) peer graph plus the field star.
    ErdosRenyi { n: u32, m_peer: usize },
    /// Wheel with chord probability p and hub-spoke probability q.
    Wheel { n: u32, p: f64, q: f64, hub: u32 },
    /// Uniform random tree over field and n nodes (no field star).
    Tree { n: u32 },
}

impl FamilyPoint {
    pub fn family_name(&self) -> &'static str {
        match self {
            FamilyPoint::ErdosRenyi { .. } => "er",
            FamilyPoint::Wheel { .. } => "wheel",
            FamilyPoint::Tree { .. } => "tree",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub n: u32,
    /// Total undirected edge count of the generated graph.
    pub m: usize,
    pub m_over_n: f64,
    pub seed: u64,
    pub w_rounds: u64,
    pub h_rounds: u64,
    pub stop_round: u64,
    pub wall_time_s: f64,
}

/// Least-squares fit of H-convergence rounds against m/n.
#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub fit: LinearFit,
}

impl SweepTable {
    /// Mean H-convergence rounds per sweep point, in input order.
    pub fn mean_h_rounds_per_point(&self, points: usize, seeds: usize) -> Vec<f64> {
        let mut means = Vec::with_capacity(points);
        for p in 0..points {
            let slice = &self.rows[p * seeds..(p + 1) * seeds];
            means.push(slice.iter().map(|r| r.h_rounds as f64).sum::<f64>() / seeds as f64);
        }
        means
    }
}

/// Runs the algorithm on every (point, seed) pair and tabulates the
/// per-metric convergence rounds. The H-rounds-vs-m/n fit uses the
/// H-convergence rounds, the slow mode that dominates the total time.
pub fn convergence_sweep(
    points: &[FamilyPoint],
    seeds: &[u64],
    field_weight: f64,
    cfg: &StoppingConfig,
) -> Result<SweepTable> {
    assert!(!seeds.is_empty(), "at least one seed per point");
    let mut rows = Vec::with_capacity(points.len() * seeds.len());
    for point in points {
        for &seed in seeds {
            let g = match *point {
                FamilyPoint::ErdosRenyi { n, m_peer } => {
                    gen::gen_erdos_renyi(n, m_peer, field_weight, seed)?
                }
                FamilyPoint::Wheel { n, p, q, hub } => {
                    let spec = gen::WheelSpec::new(n, p, q, hub, field_weight, seed)?;
                    gen::generate_wheel(&spec)?
                }
                FamilyPoint::Tree { n } => gen::gen_random_tree(n, 0.2, 5.0, seed)?,
            };
            let started = std::time::Instant::now();
            let (_, trace) = mpa_run(&g, mpa_init(&g), cfg)?;
            let wall_time_s = started.elapsed().as_secs_f64();
            let m = g.edge_count();
            rows.push(SweepRow {
                family: point.family_name().to_string(),
                n: g.n(),
                m,
                m_over_n: m as f64 / g.n() as f64,
                seed,
                w_rounds: trace.w_convergence_round,
                h_rounds: trace.h_convergence_round,
                stop_round: trace.stop_round,
                wall_time_s,
            });
        }
    }
    let fit = fit_line(
        &rows.iter().map(|r| r.m_over_n).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.h_rounds as f64).collect::<Vec<_>>(),
    );
    Ok(SweepTable { rows, fit })
}

fn fit_line(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let pred = intercept + slope * a;
                (b - pred) * (b - pred)
            })
            .sum();
        1.0 - ss_res / syy
    } else {
        1.0
    };
    LinearFit {
        slope,
        intercept,
        r2,
        points: x.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_random_tree, tree_diameter};

    #[test]
    fn table_shape_and_determinism() {
        let points = [
            FamilyPoint::ErdosRenyi { n: 30, m_peer: 60 },
            FamilyPoint::ErdosRenyi { n: 30, m_peer: 120 },
        ];
        let seeds = [1, 2, 3];
        let cfg = StoppingConfig::default();
        let table = convergence_sweep(&points, &seeds, 0.05, &cfg).unwrap();
        assert_eq!(table.rows.len(), 6);
        let again = convergence_sweep(&points, &seeds, 0.05, &cfg).unwrap();
        for (a, b) in table.rows.iter().zip(&again.rows) {
            assert_eq!(a.h_rounds, b.h_rounds);
            assert_eq!(a.w_rounds, b.w_rounds);
        }
        assert_eq!(table.fit.points, 6);
    }

    #[test]
    fn trees_converge_within_diameter_rounds() {
        for seed in [3u64, 5, 8] {
            let g = gen_random_tree(40, 0.2, 5.0, seed).unwrap();
            let diam = tree_diameter(&g);
            let table = convergence_sweep(
                &[FamilyPoint::Tree { n: 40 }],
                &[seed],
                0.05,
                &StoppingConfig::default(),
            )
            .unwrap();
            let row = &table.rows[0];
            assert_eq!(row.m, 40);
            assert!(
                row.h_rounds <= diam as u64,
                "seed {seed}: h_rounds {} > diameter {diam}",
                row.h_rounds
            );
            assert!(row.w_rounds <= diam as u64);
            // one extra round to observe that nothing changes
            assert!(row.stop_round <= diam as u64 + 1);
        }
    }

    #[test]
    fn fit_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let fit = fit_line(&x, &y);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }
}
