//! Weighted field graphs.
//!
//! Every graph has a distinguished *field* node with index 0 plus non-field
//! nodes 1..=n. Edges are undirected with strictly positive symmetric
//! weights, and the whole graph (field included) must be connected. Graphs
//! are immutable after construction; topology changes build a new graph.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// Node identifier. Index 0 is reserved for the field node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// The field node.
pub const FIELD: NodeId = NodeId(0);

impl NodeId {
    pub fn is_field(self) -> bool {
        self.0 == 0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(i: u32) -> Self {
        NodeId(i)
    }
}

/// Undirected weighted graph over nodes {field, 1, ..., n}.
///
/// Adjacency is stored as per-node neighbor slices sorted by node id, so
/// iteration order is deterministic everywhere. Each directed orientation
/// (i -> j) of an undirected edge occupies one *slot*; `rev` maps a slot to
/// the slot of the opposite orientation, which is how message-passing code
/// finds incoming messages.
#[derive(Debug, Clone)]
pub struct WeightedFieldGraph {
    n: u32,
    offsets: Vec<usize>,
    nbr: Vec<u32>,
    wgt: Vec<f64>,
    rev: Vec<usize>,
    degree: Vec<f64>,
    edge_count: usize,
    fingerprint: u64,
}

impl WeightedFieldGraph {
    /// Builds and validates a graph with `n` non-field nodes.
    ///
    /// Endpoints must lie in {0..n}, weights must be strictly positive and
    /// finite, self-loops and duplicate edges are rejected, and the graph
    /// including the field node must be connected.
    pub fn build<I>(n: u32, weighted_edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        let mut seen: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (u, v, w) in weighted_edges {
            if u > n {
                return Err(Error::UnknownNode(NodeId(u)));
            }
            if v > n {
                return Err(Error::UnknownNode(NodeId(v)));
            }
            if u == v {
                return Err(Error::SelfLoop(NodeId(u)));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight(NodeId(u), NodeId(v), w));
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key, w).is_some() {
                return Err(Error::DuplicateEdge(NodeId(key.0), NodeId(key.1)));
            }
        }

        let n_total = n as usize + 1;
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_total];
        for (&(u, v), &w) in &seen {
            adj[u as usize].push((v, w));
            adj[v as usize].push((u, w));
        }
        // BTreeMap iteration gives (u, v) in ascending order, so each node's
        // list is already sorted except for entries added as the second
        // endpoint; sort to be safe.
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
        }

        let mut offsets = Vec::with_capacity(n_total + 1);
        let mut nbr = Vec::with_capacity(2 * seen.len());
        let mut wgt = Vec::with_capacity(2 * seen.len());
        let mut degree = Vec::with_capacity(n_total);
        offsets.push(0);
        for list in &adj {
            let mut d = 0.0;
            for &(v, w) in list {
                nbr.push(v);
                wgt.push(w);
                d += w;
            }
            degree.push(d);
            offsets.push(nbr.len());
        }

        // Connectivity: BFS from the field node.
        let mut visited = vec![false; n_total];
        visited[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &j in &nbr[offsets[u]..offsets[u + 1]] {
                let v = j as usize;
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if let Some(u) = visited.iter().position(|&v| !v) {
            return Err(Error::Disconnected(NodeId(u as u32)));
        }

        // Reverse-slot map: slot of (i -> j) maps to the slot of (j -> i).
        let mut rev = vec![0usize; nbr.len()];
        for i in 0..n_total {
            for s in offsets[i]..offsets[i + 1] {
                let j = nbr[s] as usize;
                let pos = nbr[offsets[j]..offsets[j + 1]]
                    .binary_search(&(i as u32))
                    .expect("symmetric adjacency");
                rev[s] = offsets[j] + pos;
            }
        }

        let fingerprint = structural_fingerprint(n, seen.keys().copied());

        Ok(WeightedFieldGraph {
            n,
            offsets,
            nbr,
            wgt,
            rev,
            degree,
            edge_count: seen.len(),
            fingerprint,
        })
    }

    /// Number of non-field nodes.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total node count including the field node.
    pub fn node_count(&self) -> usize {
        self.n as usize + 1
    }

    /// Number of undirected edges, field edges included.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of directed message slots (twice the edge count).
    pub fn slot_count(&self) -> usize {
        self.nbr.len()
    }

    pub fn contains(&self, i: NodeId) -> bool {
        i.0 <= self.n
    }

    /// Neighbors of `i` with edge weights, ascending by node id.
    pub fn neighbors(&self, i: NodeId) -> Result<impl Iterator<Item = (NodeId, f64)> + '_> {
        if !self.contains(i) {
            return Err(Error::UnknownNode(i));
        }
        let r = self.slots(i.index());
        Ok(self.nbr[r.clone()]
            .iter()
            .zip(&self.wgt[r])
            .map(|(&v, &w)| (NodeId(v), w)))
    }

    /// Weighted degree of `i`.
    pub fn degree(&self, i: NodeId) -> f64 {
        self.degree[i.index()]
    }

    /// Weight of the undirected edge {i, j}, if present.
    pub fn weight(&self, i: NodeId, j: NodeId) -> Option<f64> {
        if !self.contains(i) || !self.contains(j) {
            return None;
        }
        let r = self.slots(i.index());
        self.nbr[r.clone()]
            .binary_search(&j.0)
            .ok()
            .map(|pos| self.wgt[r.start + pos])
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.weight(i, j).is_some()
    }

    /// Directed slot index of (i -> j), if {i, j} is an edge.
    pub fn slot_of(&self, i: NodeId, j: NodeId) -> Option<usize> {
        if !self.contains(i) || !self.contains(j) {
            return None;
        }
        let r = self.slots(i.index());
        self.nbr[r.clone()]
            .binary_search(&j.0)
            .ok()
            .map(|pos| r.start + pos)
    }

    /// Slot range of messages originating at node index `i`.
    #[inline]
    pub fn slots(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Target node of a directed slot.
    #[inline]
    pub fn slot_target(&self, s: usize) -> NodeId {
        NodeId(self.nbr[s])
    }

    /// Weight of the edge a slot lives on.
    #[inline]
    pub fn slot_weight(&self, s: usize) -> f64 {
        self.wgt[s]
    }

    /// Slot of the opposite orientation.
    #[inline]
    pub fn slot_rev(&self, s: usize) -> usize {
        self.rev[s]
    }

    /// Origin node of every slot, as a lookup table.
    pub fn slot_origins(&self) -> Vec<u32> {
        let mut origins = vec![0u32; self.slot_count()];
        for i in 0..self.node_count() {
            for s in self.slots(i) {
                origins[s] = i as u32;
            }
        }
        origins
    }

    /// Undirected edges (i, j, w) with i < j, ascending lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.slots(i).filter_map(move |s| {
                let j = self.nbr[s];
                (j > i as u32).then(|| (NodeId(i as u32), NodeId(j), self.wgt[s]))
            })
        })
    }

    /// Returns a copy with every weight multiplied by `alpha`.
    pub fn scale_weights(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveScale(alpha));
        }
        let mut scaled = self.clone();
        for w in &mut scaled.wgt {
            *w *= alpha;
        }
        for d in &mut scaled.degree {
            *d *= alpha;
        }
        Ok(scaled)
    }

    /// Structural identity used to match message states to graphs.
    /// Weights are excluded: states are keyed by directed edges only.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Dense Laplacian L = D - C over all nodes, field row/column included.
    pub fn laplacian_dense(&self) -> nalgebra::DMatrix<f64> {
        let nt = self.node_count();
        let mut l = nalgebra::DMatrix::zeros(nt, nt);
        for i in 0..nt {
            l[(i, i)] = self.degree[i];
            for s in self.slots(i) {
                l[(i, self.nbr[s] as usize)] = -self.wgt[s];
            }
        }
        l
    }
}

fn structural_fingerprint(n: u32, edges: impl Iterator<Item = (u32, u32)>) -> u64 {
    // FNV-1a over the node count and the sorted edge list.
    let mut h: u64 = 0xcbf29ce484222325;
    let mut mix = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    mix(n as u64);
    for (u, v) in edges {
        mix(((u as u64) << 32) | v as u64);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_f12() -> WeightedFieldGraph {
        WeightedFieldGraph::build(2, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn builds_minimal_path() {
        let g = path_f12();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.slot_count(), 4);
    }

    #[test]
    fn rejects_field_unreachable() {
        // the field has no edges, so everything else is unreachable from it
        let err = WeightedFieldGraph::build(2, [(1, 2, 1.0)]).unwrap_err();
        match err {
            Error::Disconnected(node) => assert_eq!(node, NodeId(1)),
            other => panic!("expected Disconnected, got {other}"),
        }
        let _ = FIELD;
    }

    #[test]
    fn rejects_self_loop_duplicate_and_bad_weight() {
        assert!(matches!(
            WeightedFieldGraph::build(1, [(1, 1, 1.0)]),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            WeightedFieldGraph::build(2, [(0, 1, 1.0), (1, 2, 1.0), (2, 1, 0.5)]),
            Err(Error::DuplicateEdge(NodeId(1), NodeId(2)))
        ));
        assert!(matches!(
            WeightedFieldGraph::build(1, [(0, 1, 0.0)]),
            Err(Error::NonPositiveWeight(..))
        ));
        assert!(matches!(
            WeightedFieldGraph::build(1, [(0, 1, -2.0)]),
            Err(Error::NonPositiveWeight(..))
        ));
        assert!(matches!(
            WeightedFieldGraph::build(1, [(0, 7, 1.0)]),
            Err(Error::UnknownNode(NodeId(7)))
        ));
    }

    #[test]
    fn disconnected_reports_unreachable_node() {
        // f-1 connected, 2-3 off on their own.
        let err = WeightedFieldGraph::build(3, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap_err();
        match err {
            Error::Disconnected(node) => assert_eq!(node, NodeId(2)),
            other => panic!("expected Disconnected, got {other}"),
        }
    }

    #[test]
    fn neighbors_sorted_ascending() {
        let g = path_f12();
        let n1: Vec<_> = g.neighbors(NodeId(1)).unwrap().collect();
        assert_eq!(n1, vec![(FIELD, 1.0), (NodeId(2), 1.0)]);
        let n2: Vec<_> = g.neighbors(NodeId(2)).unwrap().collect();
        assert_eq!(n2, vec![(NodeId(1), 1.0)]);
        assert!(g.neighbors(NodeId(9)).is_err());
    }

    #[test]
    fn star_field_center() {
        let g = WeightedFieldGraph::build(3, [(0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.5)]).unwrap();
        assert_eq!(g.neighbors(FIELD).unwrap().count(), 3);
        assert!((g.degree(FIELD) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn weight_lookup_symmetric() {
        let g = WeightedFieldGraph::build(3, [(0, 1, 0.25), (1, 2, 2.0), (1, 3, 3.5), (2, 3, 0.5)])
            .unwrap();
        for (i, j, _) in g.edges().collect::<Vec<_>>() {
            assert_eq!(g.weight(i, j), g.weight(j, i));
        }
    }

    #[test]
    fn degree_matches_neighbor_sum() {
        let g = WeightedFieldGraph::build(3, [(0, 1, 0.25), (1, 2, 2.0), (1, 3, 3.5), (2, 3, 0.5)])
            .unwrap();
        for i in 0..=3u32 {
            let i = NodeId(i);
            let sum: f64 = g.neighbors(i).unwrap().map(|(_, w)| w).sum();
            assert!((g.degree(i) - sum).abs() <= 1e-12 * g.degree(i).max(1.0));
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let g = WeightedFieldGraph::build(3, [(0, 1, 0.25), (1, 2, 2.0), (1, 3, 3.5), (2, 3, 0.5)])
            .unwrap();
        let l = g.laplacian_dense();
        for i in 0..g.node_count() {
            let row_sum: f64 = l.row(i).iter().sum();
            assert!(row_sum.abs() < 1e-9 * g.degree(NodeId(i as u32)).max(1.0));
        }
    }

    #[test]
    fn scale_weights_checks_alpha() {
        let g = path_f12();
        assert!(matches!(
            g.scale_weights(0.0),
            Err(Error::NonPositiveScale(_))
        ));
        assert!(matches!(
            g.scale_weights(-1.0),
            Err(Error::NonPositiveScale(_))
        ));
        let doubled = g.scale_weights(2.0).unwrap();
        assert_eq!(doubled.weight(NodeId(1), NodeId(2)), Some(2.0));
        let same = g.scale_weights(1.0).unwrap();
        assert_eq!(same.weight(NodeId(1), NodeId(2)), Some(1.0));
        // structure untouched
        assert_eq!(doubled.fingerprint(), g.fingerprint());
    }

    #[test]
    fn rev_slots_are_involutive() {
        let g = WeightedFieldGraph::build(3, [(0, 1, 0.25), (1, 2, 2.0), (1, 3, 3.5), (2, 3, 0.5)])
            .unwrap();
        let origins = g.slot_origins();
        for s in 0..g.slot_count() {
            let r = g.slot_rev(s);
            assert_eq!(g.slot_rev(r), s);
            assert_eq!(origins[r], g.slot_target(s).0);
            assert_eq!(g.slot_target(r).0, origins[s]);
        }
    }

    #[test]
    fn edges_ascending_and_complete() {
        let g = WeightedFieldGraph::build(3, [(2, 3, 0.5), (0, 1, 0.25), (1, 3, 3.5), (1, 2, 2.0)])
            .unwrap();
        let edges: Vec<_> = g.edges().map(|(i, j, _)| (i.0, j.0)).collect();
        assert_eq!(edges, vec![(0, 1), (1, 2), (1, 3), (2, 3)]);
    }
}
