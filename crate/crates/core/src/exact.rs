//! Exact harmonic influence via discrete Dirichlet problems.
//!
//! For a leader l, the opinion vector x solves (L x)_i = 0 on the interior
//! nodes with boundary values x_l = 1 and x_field = 0; the harmonic
//! influence H(l) is the sum of the entries of x. The all-leaders path
//! grounds the Laplacian once: with G = inv(grounded L), the solution
//! satisfies `x_i = G[i, l] / G[l, l]`, so `H(l) = rowsum(G)[l] / G[l, l]`.

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedFieldGraph};
use nalgebra::DMatrix;

/// Above this size the per-leader solver switches from a dense
/// factorization to Jacobi-preconditioned conjugate gradients.
pub const DENSE_SOLVE_LIMIT: u32 = 2000;

/// Residual bound for solver acceptance, scaled by the maximum degree.
const RESIDUAL_TOL: f64 = 1e-10;

/// Solution of one discrete Dirichlet problem.
#[derive(Debug, Clone)]
pub struct DirichletSolution {
    /// Opinion values indexed by node id; `x[0] = 0` and `x[leader] = 1` exactly.
    pub x: Vec<f64>,
    pub leader: NodeId,
    /// Sum of all entries of `x`.
    pub influence: f64,
}

/// How an influence profile was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Exact,
    MpaEstimate { round: u64 },
}

/// Per-leader influence values for every non-field node.
#[derive(Debug, Clone)]
pub struct InfluenceProfile {
    values: Vec<f64>,
    kind: ProfileKind,
}

impl InfluenceProfile {
    pub fn exact(values: Vec<f64>) -> Self {
        InfluenceProfile {
            values,
            kind: ProfileKind::Exact,
        }
    }

    pub fn mpa_estimate(values: Vec<f64>, round: u64) -> Self {
        InfluenceProfile {
            values,
            kind: ProfileKind::MpaEstimate { round },
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Number of leaders covered.
    pub fn n(&self) -> u32 {
        self.values.len() as u32
    }

    /// Influence of leader `l`, if covered.
    pub fn get(&self, l: NodeId) -> Option<f64> {
        if l.is_field() {
            return None;
        }
        self.values.get(l.index() - 1).copied()
    }

    /// Values indexed by node id - 1.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (NodeId(k as u32 + 1), v))
    }

    /// Most influential node; ties break toward the lowest id.
    pub fn top_node(&self) -> Option<NodeId> {
        let mut best: Option<(NodeId, f64)> = None;
        for (node, v) in self.iter() {
            match best {
                Some((_, bv)) if v <= bv => {}
                _ => best = Some((node, v)),
            }
        }
        best.map(|(node, _)| node)
    }
}

/// Which linear solver backs a per-leader Dirichlet solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Dense Cholesky factorization of the reduced system.
    Dense,
    /// Matrix-free conjugate gradients with Jacobi preconditioning.
    ConjugateGradient,
}

/// Solves the Dirichlet problem for one leader.
pub fn solve_dirichlet(g: &WeightedFieldGraph, leader: NodeId) -> Result<DirichletSolution> {
    let method = if g.n() <= DENSE_SOLVE_LIMIT {
        SolveMethod::Dense
    } else {
        SolveMethod::ConjugateGradient
    };
    solve_dirichlet_with(g, leader, method)
}

/// Same as [`solve_dirichlet`] with an explicit solver choice.
pub fn solve_dirichlet_with(
    g: &WeightedFieldGraph,
    leader: NodeId,
    method: SolveMethod,
) -> Result<DirichletSolution> {
    if leader.is_field() {
        return Err(Error::FieldAsLeader);
    }
    if !g.contains(leader) {
        return Err(Error::UnknownNode(leader));
    }

    // Interior nodes R = {1..n} \ {leader}, ascending.
    let interior: Vec<usize> = (1..g.node_count())
        .filter(|&i| i != leader.index())
        .collect();
    let mut x = vec![0.0; g.node_count()];
    x[leader.index()] = 1.0;

    if !interior.is_empty() {
        let x_r = match method {
            SolveMethod::Dense => dense_interior_solve(g, leader, &interior)?,
            SolveMethod::ConjugateGradient => cg_interior_solve(g, leader, &interior)?,
        };
        for (k, &i) in interior.iter().enumerate() {
            x[i] = x_r[k];
        }
    }

    verify_residual(g, leader, &x)?;
    let influence = x.iter().sum();
    Ok(DirichletSolution {
        x,
        leader,
        influence,
    })
}

/// Reduced system L[R, R] x_R = C[R, leader] (the leader's boundary value 1
/// moved to the right-hand side; the field contributes nothing).
fn dense_interior_solve(
    g: &WeightedFieldGraph,
    leader: NodeId,
    interior: &[usize],
) -> Result<Vec<f64>> {
    let m = interior.len();
    let pos: std::collections::HashMap<usize, usize> =
        interior.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = nalgebra::DVector::<f64>::zeros(m);
    for (k, &i) in interior.iter().enumerate() {
        a[(k, k)] = g.degree(NodeId(i as u32));
        for s in g.slots(i) {
            let j = g.slot_target(s);
            let w = g.slot_weight(s);
            if j == leader {
                b[k] = w;
            } else if let Some(&kj) = pos.get(&j.index()) {
                a[(k, kj)] = -w;
            }
        }
    }
    // LU keeps the micro cases exact (no square roots); the reduced system
    // is diagonally dominant, so pivoting is tame.
    let lu = a.lu();
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::SolveFailure("reduced system is singular".into()))?;
    Ok(x.data.into())
}

fn cg_interior_solve(
    g: &WeightedFieldGraph,
    leader: NodeId,
    interior: &[usize],
) -> Result<Vec<f64>> {
    let m = interior.len();
    let mut pos = vec![usize::MAX; g.node_count()];
    for (k, &i) in interior.iter().enumerate() {
        pos[i] = k;
    }

    let apply = |v: &[f64], out: &mut [f64]| {
        for (k, &i) in interior.iter().enumerate() {
            let mut acc = g.degree(NodeId(i as u32)) * v[k];
            for s in g.slots(i) {
                let j = g.slot_target(s).index();
                if pos[j] != usize::MAX {
                    acc -= g.slot_weight(s) * v[pos[j]];
                }
            }
            out[k] = acc;
        }
    };

    let mut b = vec![0.0; m];
    for (k, &i) in interior.iter().enumerate() {
        if let Some(w) = g.weight(NodeId(i as u32), leader) {
            b[k] = w;
        }
    }
    let inv_diag: Vec<f64> = interior
        .iter()
        .map(|&i| 1.0 / g.degree(NodeId(i as u32)))
        .collect();

    let max_degree = (0..g.node_count())
        .map(|i| g.degree(NodeId(i as u32)))
        .fold(0.0f64, f64::max);
    // Drive the residual two orders below the acceptance bound.
    let target = 1e-12 * max_degree;

    let mut x = vec![0.0; m];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; m];

    let max_iter = 20 * m + 100;
    for _ in 0..max_iter {
        let sup = r.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if sup <= target {
            break;
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::SolveFailure("CG direction lost positivity".into()));
        }
        let alpha = rz / pap;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..m {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    Ok(x)
}

/// Checks (L x)_i = 0 on the interior to the documented tolerance.
fn verify_residual(g: &WeightedFieldGraph, leader: NodeId, x: &[f64]) -> Result<()> {
    let max_degree = (0..g.node_count())
        .map(|i| g.degree(NodeId(i as u32)))
        .fold(0.0f64, f64::max);
    let bound = RESIDUAL_TOL * max_degree;
    for i in 1..g.node_count() {
        if i == leader.index() {
            continue;
        }
        let mut res = g.degree(NodeId(i as u32)) * x[i];
        for s in g.slots(i) {
            res -= g.slot_weight(s) * x[g.slot_target(s).index()];
        }
        if res.abs() > bound {
            return Err(Error::SolveFailure(format!(
                "interior residual {res:.3e} at node {i} exceeds {bound:.3e}"
            )));
        }
    }
    Ok(())
}

/// Exact influence of every leader.
///
/// For graphs up to [`DENSE_SOLVE_LIMIT`] nodes this inverts the grounded
/// Laplacian once and reads `H(l) = rowsum(G)[l] / G[l, l]`; larger graphs
/// fall back to one conjugate-gradient solve per leader.
pub fn exact_influence_all(g: &WeightedFieldGraph) -> Result<InfluenceProfile> {
    let n = g.n() as usize;
    if n == 0 {
        return Ok(InfluenceProfile::exact(Vec::new()));
    }
    if g.n() > DENSE_SOLVE_LIMIT {
        let mut values = Vec::with_capacity(n);
        for l in 1..=g.n() {
            values.push(
                solve_dirichlet_with(g, NodeId(l), SolveMethod::ConjugateGradient)?.influence,
            );
        }
        return Ok(InfluenceProfile::exact(values));
    }

    // Grounded Laplacian over nodes 1..=n.
    let mut grounded = DMatrix::<f64>::zeros(n, n);
    for i in 1..=n {
        grounded[(i - 1, i - 1)] = g.degree(NodeId(i as u32));
        for s in g.slots(i) {
            let j = g.slot_target(s);
            if !j.is_field() {
                grounded[(i - 1, j.index() - 1)] = -g.slot_weight(s);
            }
        }
    }
    let inv = grounded
        .try_inverse()
        .ok_or_else(|| Error::SolveFailure("grounded Laplacian is singular".into()))?;

    let mut values = Vec::with_capacity(n);
    for l in 0..n {
        let row_sum: f64 = inv.column(l).iter().sum();
        let diag = inv[(l, l)];
        if diag <= 0.0 {
            return Err(Error::SolveFailure(format!(
                "non-positive diagonal of the grounded inverse at leader {}",
                l + 1
            )));
        }
        values.push(row_sum / diag);
    }
    Ok(InfluenceProfile::exact(values))
}
