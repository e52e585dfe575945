//! File formats: SNAP-style edge lists, the weighted graph format,
//! community label CSVs, and the CSV writers shared by the CLI.
//!
//! Numeric values are printed with 12 significant digits so repeated runs
//! produce byte-identical files.

use crate::error::{Error, Result};
use crate::exact::InfluenceProfile;
use crate::graph::{NodeId, WeightedFieldGraph, FIELD};
use crate::mpa::ConvergenceTrace;
use std::collections::BTreeSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// 12 significant digits, locale independent.
pub fn fmt_sig12(v: f64) -> String {
    format!("{:.11e}", v)
}

fn open_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

fn create_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

/// An edge-list graph plus the mapping from dense ids back to the ids used
/// in the input file. `original_ids[k - 1]` is the file id of node k.
#[derive(Debug)]
pub struct LoadedEdgeList {
    pub graph: WeightedFieldGraph,
    pub original_ids: Vec<u64>,
}

/// Loads a whitespace-separated `u v` edge list (SNAP ego-network format).
///
/// Lines starting with `#` are ignored, duplicate edges collapse to one.
/// Nodes are renumbered densely to 1..n in order of first appearance, and
/// every node is connected to the field node at `field_weight`; peer edges
/// get weight 1.
pub fn load_edge_list(path: impl AsRef<Path>, field_weight: f64) -> Result<LoadedEdgeList> {
    let path = path.as_ref();
    if !(field_weight > 0.0) {
        return Err(Error::NonPositiveWeight(FIELD, NodeId(1), field_weight));
    }
    let file = open_file(path)?;
    let reader = std::io::BufReader::new(file);

    let mut ids: std::collections::HashMap<u64, u32> = std::collections::HashMap::new();
    let mut original_ids: Vec<u64> = Vec::new();
    let mut peers: BTreeSet<(u32, u32)> = BTreeSet::new();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(lineno, "expected two node ids".into())),
        };
        let a: u64 = a
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid node id `{a}`")))?;
        let b: u64 = b
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid node id `{b}`")))?;
        if a == b {
            return Err(parse_err(lineno, format!("self-loop at node {a}")));
        }
        let mut dense = |orig: u64| {
            *ids.entry(orig).or_insert_with(|| {
                original_ids.push(orig);
                original_ids.len() as u32
            })
        };
        let (u, v) = (dense(a), dense(b));
        peers.insert((u.min(v), u.max(v)));
    }

    if peers.is_empty() {
        return Err(Error::EmptyGraph(path.display().to_string()));
    }

    let n = original_ids.len() as u32;
    let mut edges: Vec<(u32, u32, f64)> = (1..=n).map(|i| (0, i, field_weight)).collect();
    edges.extend(peers.into_iter().map(|(u, v)| (u, v, 1.0)));
    Ok(LoadedEdgeList {
        graph: WeightedFieldGraph::build(n, edges)?,
        original_ids,
    })
}

/// Writes the peer edges (field edges omitted) in SNAP format.
pub fn save_edge_list(g: &WeightedFieldGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(create_file(path)?);
    for (i, j, _) in g.edges() {
        if !i.is_field() {
            writeln!(w, "{i} {j}")?;
        }
    }
    Ok(())
}

/// Writes the full weighted graph: optional `#` comments, a header line with
/// n, then one `i j w` line per edge with the field node written as 0.
/// Weights use the shortest representation that parses back to the same
/// float, so save/load is the identity.
pub fn save_graph(
    g: &WeightedFieldGraph,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(create_file(path)?);
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{}", g.n())?;
    for (i, j, wt) in g.edges() {
        writeln!(w, "{i} {j} {wt}")?;
    }
    Ok(())
}

/// Reads the format written by [`save_graph`].
pub fn load_graph(path: impl AsRef<Path>) -> Result<WeightedFieldGraph> {
    let path = path.as_ref();
    let file = open_file(path)?;
    let reader = std::io::BufReader::new(file);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };

    let mut n: Option<u32> = None;
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if n.is_none() {
            n = Some(
                trimmed
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("invalid node count `{trimmed}`")))?,
            );
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(lineno, "expected `i j w`".into()));
        }
        let i: u32 = parts[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid node id `{}`", parts[0])))?;
        let j: u32 = parts[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid node id `{}`", parts[1])))?;
        let w: f64 = parts[2]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid weight `{}`", parts[2])))?;
        edges.push((i, j, w));
    }
    let n = n.ok_or_else(|| Error::EmptyGraph(path.display().to_string()))?;
    WeightedFieldGraph::build(n, edges)
}

/// Community assignment for the non-field nodes, ids contiguous from 0.
#[derive(Debug, Clone)]
pub struct CommunityLabels {
    labels: Vec<u32>,
    n_communities: usize,
}

impl CommunityLabels {
    /// Builds labels from a per-node vector (index = node id - 1). Arbitrary
    /// label values are remapped to 0..k in ascending value order.
    pub fn from_labels(raw: Vec<u32>) -> Result<Self> {
        let distinct: BTreeSet<u32> = raw.iter().copied().collect();
        let remap: std::collections::HashMap<u32, u32> = distinct
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, k as u32))
            .collect();
        let labels = raw.into_iter().map(|v| remap[&v]).collect();
        Ok(CommunityLabels {
            labels,
            n_communities: distinct.len(),
        })
    }

    pub fn get(&self, i: NodeId) -> Option<u32> {
        if i.is_field() {
            return None;
        }
        self.labels.get(i.index() - 1).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_communities];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Nodes of one community, ascending.
    pub fn members(&self, community: u32) -> Vec<NodeId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == community)
            .map(|(k, _)| NodeId(k as u32 + 1))
            .collect()
    }
}

/// Loads a `node,community` CSV covering every node 1..=n exactly once.
pub fn load_communities(path: impl AsRef<Path>, n: u32) -> Result<CommunityLabels> {
    let path = path.as_ref();
    let file = open_file(path)?;
    let reader = std::io::BufReader::new(file);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };

    let mut raw: Vec<Option<u32>> = vec![None; n as usize];
    let mut saw_header = false;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != "node,community" {
                return Err(parse_err(lineno, "expected header `node,community`".into()));
            }
            saw_header = true;
            continue;
        }
        let (a, b) = trimmed
            .split_once(',')
            .ok_or_else(|| parse_err(lineno, "expected `node,community`".into()))?;
        let node: u32 = a
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid node id `{a}`")))?;
        let label: u32 = b
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid community id `{b}`")))?;
        if node == 0 || node > n {
            return Err(Error::UnknownNode(NodeId(node)));
        }
        let slot = &mut raw[node as usize - 1];
        if slot.is_some() {
            return Err(parse_err(
                lineno,
                format!("duplicate label for node {node}"),
            ));
        }
        *slot = Some(label);
    }
    if !saw_header {
        return Err(parse_err(1, "expected header `node,community`".into()));
    }
    let mut labels = Vec::with_capacity(n as usize);
    for (k, slot) in raw.into_iter().enumerate() {
        match slot {
            Some(l) => labels.push(l),
            None => return Err(Error::MissingNode(NodeId(k as u32 + 1))),
        }
    }
    CommunityLabels::from_labels(labels)
}

/// A subgraph induced by a set of non-field nodes, renumbered densely in
/// ascending old-id order. `old_ids[k - 1]` is the source-graph id of node k.
#[derive(Debug)]
pub struct InducedSubgraph {
    pub graph: WeightedFieldGraph,
    pub old_ids: Vec<u32>,
}

/// Keeps the peer edges among `keep` and regenerates every field edge at
/// `field_weight`.
pub fn induce_subgraph(
    g: &WeightedFieldGraph,
    keep: &BTreeSet<NodeId>,
    field_weight: f64,
) -> Result<InducedSubgraph> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    if !(field_weight > 0.0) {
        return Err(Error::NonPositiveWeight(FIELD, NodeId(1), field_weight));
    }
    for &i in keep {
        if i.is_field() || !g.contains(i) {
            return Err(Error::UnknownNode(i));
        }
    }
    let old_ids: Vec<u32> = keep.iter().map(|i| i.0).collect();
    let new_id: std::collections::HashMap<u32, u32> = old_ids
        .iter()
        .enumerate()
        .map(|(k, &old)| (old, k as u32 + 1))
        .collect();

    let n = old_ids.len() as u32;
    let mut edges: Vec<(u32, u32, f64)> = (1..=n).map(|i| (0, i, field_weight)).collect();
    for (i, j, w) in g.edges() {
        if i.is_field() {
            continue;
        }
        if let (Some(&u), Some(&v)) = (new_id.get(&i.0), new_id.get(&j.0)) {
            edges.push((u, v, w));
        }
    }
    Ok(InducedSubgraph {
        graph: WeightedFieldGraph::build(n, edges)?,
        old_ids,
    })
}

/// Writes an influence profile as `node,influence` rows sorted by node id.
pub fn write_profile_csv(
    profile: &InfluenceProfile,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(create_file(path)?);
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "node,influence")?;
    for (node, value) in profile.iter() {
        writeln!(w, "{node},{}", fmt_sig12(value))?;
    }
    Ok(())
}

/// Reads a `node,influence` CSV back into a profile. Rows may appear in any
/// order but must cover 1..=n exactly.
pub fn read_profile_csv(path: impl AsRef<Path>) -> Result<InfluenceProfile> {
    let path = path.as_ref();
    let file = open_file(path)?;
    let reader = std::io::BufReader::new(file);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut rows: Vec<(u32, f64)> = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != "node,influence" {
                return Err(parse_err(lineno, "expected header `node,influence`".into()));
            }
            saw_header = true;
            continue;
        }
        let (a, b) = trimmed
            .split_once(',')
            .ok_or_else(|| parse_err(lineno, "expected `node,influence`".into()))?;
        let node: u32 = a
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid node id `{a}`")))?;
        let value: f64 = b
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid influence `{b}`")))?;
        rows.push((node, value));
    }
    if !saw_header {
        return Err(parse_err(1, "expected header `node,influence`".into()));
    }
    rows.sort_unstable_by_key(|&(node, _)| node);
    let n = rows.len() as u32;
    let mut values = Vec::with_capacity(rows.len());
    for (k, (node, value)) in rows.into_iter().enumerate() {
        if node != k as u32 + 1 {
            return Err(Error::MissingNode(NodeId(k as u32 + 1)));
        }
        values.push(value);
    }
    let _ = n;
    Ok(InfluenceProfile::exact(values))
}

/// Writes a convergence trace as `t,dW,dH` rows.
pub fn write_trace_csv(
    trace: &ConvergenceTrace,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(create_file(path)?);
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "t,dW,dH")?;
    for rec in &trace.records {
        writeln!(w, "{},{},{}", rec.t, fmt_sig12(rec.d_w), fmt_sig12(rec.d_h))?;
    }
    Ok(())
}
