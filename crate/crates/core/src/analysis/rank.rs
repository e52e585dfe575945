//! Rank agreement between influence profiles and the per-community
//! overestimation summary.

use crate::error::{Error, Result};
use crate::exact::InfluenceProfile;
use crate::graph::NodeId;
use crate::io::CommunityLabels;
use serde::Serialize;

/// Agreement between an exact profile and an estimate.
#[derive(Debug, Clone, Serialize)]
pub struct RankingComparison {
    /// Tie-corrected Kendall tau-b.
    pub kendall_tau: f64,
    pub spearman_rho: f64,
    pub top1_match: bool,
    pub exact_top1: u32,
    pub estimate_top1: u32,
    /// Estimate / exact per node, indexed by node id - 1.
    pub overestimation_ratio: Vec<f64>,
}

/// Compares two profiles over the same node set.
pub fn compare_rankings(
    exact: &InfluenceProfile,
    est: &InfluenceProfile,
) -> Result<RankingComparison> {
    if exact.n() != est.n() || exact.n() == 0 {
        return Err(Error::NodeSetMismatch(exact.n() as usize, est.n() as usize));
    }
    let x = exact.values();
    let y = est.values();
    let exact_top1 = exact.top_node().expect("non-empty profile").0;
    let estimate_top1 = est.top_node().expect("non-empty profile").0;
    Ok(RankingComparison {
        kendall_tau: kendall_tau_b(x, y),
        spearman_rho: spearman_rho(x, y),
        top1_match: exact_top1 == estimate_top1,
        exact_top1,
        estimate_top1,
        overestimation_ratio: x.iter().zip(y).map(|(a, b)| b / a).collect(),
    })
}

/// Kendall tau-b by direct pair counting.
///
/// With one side constant there is no ranking information and 0 is
/// returned; with both sides constant the rankings agree trivially and the
/// result is 1. Quadratic in n, which is fine at experiment sizes.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut ties_x = 0u64;
    let mut ties_y = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i].partial_cmp(&x[j]).expect("finite influence values");
            let dy = y[i].partial_cmp(&y[j]).expect("finite influence values");
            match (dx, dy) {
                (std::cmp::Ordering::Equal, std::cmp::Ordering::Equal) => {
                    ties_x += 1;
                    ties_y += 1;
                }
                (std::cmp::Ordering::Equal, _) => ties_x += 1,
                (_, std::cmp::Ordering::Equal) => ties_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let dx = n0 - ties_x as f64;
    let dy = n0 - ties_y as f64;
    if dx <= 0.0 && dy <= 0.0 {
        return 1.0;
    }
    if dx <= 0.0 || dy <= 0.0 {
        return 0.0;
    }
    ((concordant as f64 - discordant as f64) / (dx * dy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rho: Pearson correlation of mid-ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    let rx = mid_ranks(x);
    let ry = mid_ranks(y);
    pearson(&rx, &ry)
}

fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
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
    if sxx <= 0.0 && syy <= 0.0 {
        return 1.0;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Per-community overestimation summary.
#[derive(Debug, Clone, Serialize)]
pub struct CommunitySummary {
    pub community: u32,
    pub size: usize,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    /// Overlap fraction of the top-k (k = 10) nodes by exact and by
    /// estimated influence within the community.
    pub topk_overlap: f64,
    /// Least-squares slope of estimate against exact within the community.
    pub slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommunityArtefact {
    pub per_community: Vec<CommunitySummary>,
}

impl CommunityArtefact {
    /// Community id with the largest slope.
    pub fn steepest_community(&self) -> Option<u32> {
        self.per_community
            .iter()
            .max_by(|a, b| a.slope.partial_cmp(&b.slope).unwrap())
            .map(|c| c.community)
    }
}

const TOP_K: usize = 10;

/// Splits the overestimation by community: how strongly the estimate
/// inflates influence inside each block, and how well the within-community
/// ranking survives.
pub fn community_artefact(
    exact: &InfluenceProfile,
    est: &InfluenceProfile,
    labels: &CommunityLabels,
) -> Result<CommunityArtefact> {
    if exact.n() != est.n() {
        return Err(Error::NodeSetMismatch(exact.n() as usize, est.n() as usize));
    }
    if labels.len() != exact.n() as usize {
        return Err(Error::LabelMismatch(labels.len(), exact.n() as usize));
    }

    let mut per_community = Vec::with_capacity(labels.n_communities());
    for c in 0..labels.n_communities() as u32 {
        let members = labels.members(c);
        let xs: Vec<f64> = members.iter().map(|&m| exact.get(m).unwrap()).collect();
        let ys: Vec<f64> = members.iter().map(|&m| est.get(m).unwrap()).collect();
        let ratios: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| b / a).collect();
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let max_ratio = ratios.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        per_community.push(CommunitySummary {
            community: c,
            size: members.len(),
            mean_ratio,
            max_ratio,
            topk_overlap: topk_overlap(&members, &xs, &ys),
            slope: ls_slope(&xs, &ys),
        });
    }
    Ok(CommunityArtefact { per_community })
}

fn topk_overlap(members: &[NodeId], xs: &[f64], ys: &[f64]) -> f64 {
    let k = TOP_K.min(members.len());
    if k == 0 {
        return 1.0;
    }
    let top = |vals: &[f64]| -> std::collections::BTreeSet<u32> {
        let mut idx: Vec<usize> = (0..members.len()).collect();
        // descending by value, ascending id on ties
        idx.sort_by(|&a, &b| {
            vals[b]
                .partial_cmp(&vals[a])
                .unwrap()
                .then(members[a].0.cmp(&members[b].0))
        });
        idx[..k].iter().map(|&i| members[i].0).collect()
    };
    let tx = top(xs);
    let ty = top(ys);
    tx.intersection(&ty).count() as f64 / k as f64
}

/// Ordinary least-squares slope of y against x; falls back to the
/// through-origin slope when x has no variance (single-node communities).
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx > 1e-12 * mx.abs().max(1.0) {
        sxy / sxx
    } else {
        let sxy0: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx0: f64 = x.iter().map(|a| a * a).sum();
        sxy0 / sxx0
    }
}
