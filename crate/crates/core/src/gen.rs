//! Seeded graph generators for the experiment families.
//!
//! All generators draw from a ChaCha8 stream with a documented order, so a
//! given seed reproduces the same graph on every platform. Candidate edges
//! are enumerated in ascending lexicographic (i, j) order with one uniform
//! draw per candidate.

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedFieldGraph};
use crate::io::CommunityLabels;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters of the wheel-with-extra-connections family.
///
/// The graph contains the cycle 1-2-...-n-1, an edge from the field node to
/// every non-field node at `field_weight`, random chords drawn with
/// probability `p` between nodes outside {1, 26}, and random spokes from
/// `hub` drawn with probability `q`. Chords are drawn from the stream seeded
/// by `seed`, hub spokes from the stream seeded by `hub_seed`, so two specs
/// sharing `seed` share their chord set exactly.
#[derive(Debug, Clone)]
pub struct WheelSpec {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub hub: u32,
    pub field_weight: f64,
    pub seed: u64,
    pub hub_seed: u64,
}

impl WheelSpec {
    pub fn new(n: u32, p: f64, q: f64, hub: u32, field_weight: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidConfig(format!(
                "probabilities must lie in [0, 1], got p={p}, q={q}"
            )));
        }
        if hub == 0 || hub > n {
            return Err(Error::UnknownNode(NodeId(hub)));
        }
        if !(field_weight > 0.0) {
            return Err(Error::NonPositiveWeight(NodeId(0), NodeId(1), field_weight));
        }
        Ok(WheelSpec {
            n,
            p,
            q,
            hub,
            field_weight,
            seed,
            hub_seed: seed.wrapping_add(1),
        })
    }
}

/// Generates one wheel graph. Deterministic under the spec's seeds.
pub fn generate_wheel(spec: &WheelSpec) -> Result<WeightedFieldGraph> {
    let n = spec.n;
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    for i in 1..=n {
        edges.push((0, i, spec.field_weight));
    }
    let mut present = std::collections::BTreeSet::new();
    let add_peer = |edges: &mut Vec<_>,
                    present: &mut std::collections::BTreeSet<(u32, u32)>,
                    i: u32,
                    j: u32| {
        let key = (i.min(j), i.max(j));
        if present.insert(key) {
            edges.push((key.0, key.1, 1.0));
        }
    };
    for i in 1..n {
        add_peer(&mut edges, &mut present, i, i + 1);
    }
    if n > 2 {
        add_peer(&mut edges, &mut present, 1, n);
    }

    // Chords between nodes outside {1, 26}: one draw per candidate pair.
    let mut chord_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in 2..=n {
        if i == 26 {
            continue;
        }
        for j in (i + 1)..=n {
            if present.contains(&(i, j)) {
                continue;
            }
            if chord_rng.gen::<f64>() < spec.p {
                add_peer(&mut edges, &mut present, i, j);
            }
        }
    }

    // Hub spokes, enumerated by the opposite endpoint.
    let mut hub_rng = ChaCha8Rng::seed_from_u64(spec.hub_seed);
    for j in 1..=n {
        if j == spec.hub {
            continue;
        }
        let key = (spec.hub.min(j), spec.hub.max(j));
        if present.contains(&key) {
            continue;
        }
        if hub_rng.gen::<f64>() < spec.q {
            add_peer(&mut edges, &mut present, spec.hub, j);
        }
    }

    WeightedFieldGraph::build(n, edges)
}

/// Builds the before/after pair of the topology-change experiment: same
/// chord set (seed), hub 1 with spoke stream seed+1, hub 26 with seed+2.
pub fn wheel_pair(
    n: u32,
    p: f64,
    q: f64,
    field_weight: f64,
    seed: u64,
) -> Result<(WeightedFieldGraph, WeightedFieldGraph)> {
    let mut before = WheelSpec::new(n, p, q, 1, field_weight, seed)?;
    before.hub_seed = seed.wrapping_add(1);
    let mut after = WheelSpec::new(n, p, q, 26, field_weight, seed)?;
    after.hub_seed = seed.wrapping_add(2);
    Ok((generate_wheel(&before)?, generate_wheel(&after)?))
}

/// Erdos-Renyi G(n, m) peer graph plus the field star.
///
/// Exactly `m_peer` distinct peer edges of weight 1 are drawn uniformly;
/// every node is also tied to the field at `field_weight`, which keeps the
/// graph connected for any draw. Intended for sparse graphs.
pub fn gen_erdos_renyi(
    n: u32,
    m_peer: usize,
    field_weight: f64,
    seed: u64,
) -> Result<WeightedFieldGraph> {
    let max_pairs = n as usize * (n as usize - 1) / 2;
    if m_peer > max_pairs {
        return Err(Error::InvalidConfig(format!(
            "requested {m_peer} peer edges but only {max_pairs} pairs exist"
        )));
    }
    if !(field_weight > 0.0) {
        return Err(Error::NonPositiveWeight(NodeId(0), NodeId(1), field_weight));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut peers = std::collections::BTreeSet::new();
    while peers.len() < m_peer {
        let i = rng.gen_range(1..=n);
        let j = rng.gen_range(1..=n);
        if i != j {
            peers.insert((i.min(j), i.max(j)));
        }
    }
    let mut edges: Vec<(u32, u32, f64)> = (1..=n).map(|i| (0, i, field_weight)).collect();
    edges.extend(peers.into_iter().map(|(i, j)| (i, j, 1.0)));
    WeightedFieldGraph::build(n, edges)
}

/// Uniform random tree on {field, 1..n} via a Prufer sequence, with edge
/// weights drawn uniformly from [w_lo, w_hi).
pub fn gen_random_tree(n: u32, w_lo: f64, w_hi: f64, seed: u64) -> Result<WeightedFieldGraph> {
    assert!(w_lo > 0.0 && w_hi >= w_lo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nt = n as usize + 1;
    let mut edges: Vec<(u32, u32, f64)> = Vec::with_capacity(nt - 1);
    let w = |rng: &mut ChaCha8Rng| rng.gen_range(w_lo..w_hi);
    if nt == 2 {
        let wt = w(&mut rng);
        edges.push((0, 1, wt));
        return WeightedFieldGraph::build(n, edges);
    }
    let seq: Vec<u32> = (0..nt - 2).map(|_| rng.gen_range(0..nt as u32)).collect();
    let mut degree = vec![1u32; nt];
    for &x in &seq {
        degree[x as usize] += 1;
    }
    let mut leaves: std::collections::BTreeSet<u32> = (0..nt as u32)
        .filter(|&v| degree[v as usize] == 1)
        .collect();
    for &x in &seq {
        let leaf = *leaves.iter().next().expect("prufer decode");
        leaves.remove(&leaf);
        let wt = w(&mut rng);
        edges.push((leaf.min(x), leaf.max(x), wt));
        degree[x as usize] -= 1;
        if degree[x as usize] == 1 {
            leaves.insert(x);
        }
    }
    let mut it = leaves.iter();
    let (a, b) = (*it.next().unwrap(), *it.next().unwrap());
    let wt = w(&mut rng);
    edges.push((a.min(b), a.max(b), wt));
    WeightedFieldGraph::build(n, edges)
}

/// Three-block (or k-block) stochastic block model plus the field star.
///
/// Blocks are laid out contiguously: block 0 holds nodes `1..=sizes[0]`, and
/// so on. Every node pair consumes exactly one uniform draw; a pair inside
/// block b is kept with probability `p_within[b]`, a cross-block pair with
/// probability `p_across`. Returns the graph together with the block labels.
pub fn gen_sbm(
    sizes: &[usize],
    p_within: &[f64],
    p_across: f64,
    field_weight: f64,
    seed: u64,
) -> Result<(WeightedFieldGraph, CommunityLabels)> {
    assert_eq!(sizes.len(), p_within.len());
    let n: usize = sizes.iter().sum();
    let mut block_of = vec![0u32; n + 1];
    let mut next = 1usize;
    for (b, &size) in sizes.iter().enumerate() {
        block_of[next..next + size].fill(b as u32);
        next += size;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32, f64)> = (1..=n as u32).map(|i| (0, i, field_weight)).collect();
    for i in 1..=n as u32 {
        for j in (i + 1)..=n as u32 {
            let prob = if block_of[i as usize] == block_of[j as usize] {
                p_within[block_of[i as usize] as usize]
            } else {
                p_across
            };
            if rng.gen::<f64>() < prob {
                edges.push((i, j, 1.0));
            }
        }
    }
    let graph = WeightedFieldGraph::build(n as u32, edges)?;
    let labels = CommunityLabels::from_labels(block_of[1..].to_vec())?;
    Ok((graph, labels))
}

/// Hop diameter, exact on trees (two sweeps of breadth-first search).
pub fn tree_diameter(g: &WeightedFieldGraph) -> usize {
    let first = bfs_depths(g, NodeId(0));
    let far = first
        .iter()
        .enumerate()
        .max_by_key(|&(_, d)| *d)
        .map(|(i, _)| NodeId(i as u32))
        .unwrap();
    let second = bfs_depths(g, far);
    second.into_iter().max().unwrap()
}

fn bfs_depths(g: &WeightedFieldGraph, from: NodeId) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.node_count()];
    depth[from.index()] = 0;
    let mut queue = std::collections::VecDeque::from([from.index()]);
    while let Some(u) = queue.pop_front() {
        for s in g.slots(u) {
            let v = g.slot_target(s).index();
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    depth
}
