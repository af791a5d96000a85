//! Structural graph analytics: k-core decomposition by peeling, subgraph
//! density, distance-to-core summaries, a degree-proportional random-graph
//! baseline, and CSV emission for metric time series.

use std::collections::{BTreeSet, VecDeque};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, PlayerType, Topology};
use crate::value::{rat, Rat};

/// Per-node coreness: the largest `k` for which the node is part of the
/// `k`-core. Computed by peeling minimum-degree nodes with a bucket queue.
pub fn coreness(topo: &Topology) -> Vec<u32> {
    let n = topo.node_count();
    let mut degree: Vec<usize> = topo.nodes().map(|i| topo.degree(i)).collect();
    let top = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (i, &d) in degree.iter().enumerate() {
        buckets[d].push(i);
    }
    let mut core = vec![0u32; n];
    let mut peeled = vec![false; n];
    let mut floor = 0usize;
    let mut remaining = n;
    while remaining > 0 {
        while buckets[floor].is_empty() {
            floor += 1;
        }
        let Some(v) = buckets[floor].pop() else {
            continue;
        };
        if peeled[v] || degree[v] != floor {
            // Stale queue entry from an earlier degree.
            continue;
        }
        peeled[v] = true;
        remaining -= 1;
        core[v] = floor as u32;
        for &w in topo.neighbors(v as NodeId) {
            let w = w as usize;
            // Degrees are clamped at the current floor: neighbors already
            // counted into this level stay there.
            if !peeled[w] && degree[w] > floor {
                degree[w] -= 1;
                buckets[degree[w]].push(w);
            }
        }
    }
    core
}

/// Nodes of the `k`-core: the maximal subgraph in which every node keeps at
/// least `k` neighbors inside the subgraph. May be empty.
pub fn k_core(topo: &Topology, k: u32) -> BTreeSet<NodeId> {
    coreness(topo)
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c >= k)
        .map(|(i, _)| i as NodeId)
        .collect()
}

/// Connected components of the `k`-core, reported separately so each maximal
/// connected piece can be inspected on its own. Sorted by smallest member.
pub fn k_core_components(topo: &Topology, k: u32) -> Vec<BTreeSet<NodeId>> {
    let members = k_core(topo, k);
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut components = Vec::new();
    for &start in &members {
        if seen.contains(&start) {
            continue;
        }
        let mut component = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(v) = queue.pop_front() {
            component.insert(v);
            for &w in topo.neighbors(v) {
                if members.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        components.push(component);
    }
    components
}

/// Fraction of possible links present inside `nodes`: induced link count
/// over `C(|nodes|, 2)`.
pub fn subgraph_density(topo: &Topology, nodes: &BTreeSet<NodeId>) -> Result<Rat> {
    for &v in nodes {
        if (v as usize) >= topo.node_count() {
            return Err(Error::UnknownNode(v));
        }
    }
    let size = nodes.len();
    if size < 2 {
        return Err(Error::InvalidConfig(
            "density needs at least two nodes".into(),
        ));
    }
    let mut endpoint_hits = 0usize;
    for &v in nodes {
        endpoint_hits += topo
            .neighbors(v)
            .iter()
            .filter(|w| nodes.contains(w))
            .count();
    }
    let present = endpoint_hits / 2;
    let possible = size * (size - 1) / 2;
    Ok(rat(present as i128, possible as i128))
}

/// Distance-to-core summary for a set of shell nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreDistanceReport {
    /// Mean hop distance over the shell nodes that can reach the core;
    /// `None` when none can.
    pub mean: Option<Rat>,
    pub reachable: usize,
    /// Shell nodes with no path to any core node; counted, never averaged.
    pub unreachable: usize,
}

/// Mean over `shell` of each node's hop distance to the nearest `core`
/// node, via one multi-source breadth-first search.
pub fn mean_node_core_distance(
    topo: &Topology,
    core: &BTreeSet<NodeId>,
    shell: &BTreeSet<NodeId>,
) -> Result<CoreDistanceReport> {
    for &v in core.iter().chain(shell.iter()) {
        if (v as usize) >= topo.node_count() {
            return Err(Error::UnknownNode(v));
        }
    }
    if core.is_empty() {
        return Err(Error::InvalidConfig("the core set is empty".into()));
    }
    if let Some(overlap) = shell.iter().find(|v| core.contains(v)) {
        return Err(Error::InvalidConfig(format!(
            "node {overlap} is in both core and shell"
        )));
    }
    let mut hops: Vec<Option<u32>> = vec![None; topo.node_count()];
    let mut queue = VecDeque::new();
    for &v in core {
        hops[v as usize] = Some(0);
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        let next = hops[v as usize].expect("queued nodes have hop counts") + 1;
        for &w in topo.neighbors(v) {
            if hops[w as usize].is_none() {
                hops[w as usize] = Some(next);
                queue.push_back(w);
            }
        }
    }
    let mut total = 0i128;
    let mut reachable = 0usize;
    let mut unreachable = 0usize;
    for &v in shell {
        match hops[v as usize] {
            Some(h) => {
                total += i128::from(h);
                reachable += 1;
            }
            None => unreachable += 1,
        }
    }
    let mean = (reachable > 0).then(|| rat(total, reachable as i128));
    Ok(CoreDistanceReport {
        mean,
        reachable,
        unreachable,
    })
}

/// Degree-proportional random graph: a seed clique of `m0` nodes, then each
/// arriving node links to `links_per_arrival` distinct existing nodes drawn
/// with probability proportional to current degree. Deterministic per seed.
pub fn preferential_attachment(
    n: usize,
    m0: usize,
    links_per_arrival: usize,
    seed: u64,
) -> Result<Topology> {
    if links_per_arrival < 1 || m0 < links_per_arrival || n < m0 {
        return Err(Error::InfeasibleParams(format!(
            "attachment needs n >= m0 >= links_per_arrival >= 1, \
             got n={n}, m0={m0}, links_per_arrival={links_per_arrival}"
        )));
    }
    let mut topo = Topology::with_split(0, m0);
    for u in 0..m0 {
        for v in (u + 1)..m0 {
            topo.add_link(u as NodeId, v as NodeId)?;
        }
    }
    // Every link endpoint goes into the urn once, so a uniform draw from it
    // is degree-proportional sampling.
    let mut urn: Vec<NodeId> = Vec::new();
    for u in 0..m0 {
        for v in (u + 1)..m0 {
            urn.push(u as NodeId);
            urn.push(v as NodeId);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in m0..n {
        let node = topo.add_node(PlayerType::TypeB);
        let mut targets: BTreeSet<NodeId> = BTreeSet::new();
        while targets.len() < links_per_arrival {
            let pick = if urn.is_empty() {
                // A one-node seed has no links yet; fall back to a uniform
                // draw over the nodes already present.
                rng.gen_range(0..node)
            } else {
                urn[rng.gen_range(0..urn.len())]
            };
            targets.insert(pick);
        }
        for &t in &targets {
            topo.add_link(node, t)?;
            urn.push(node);
            urn.push(t);
        }
    }
    Ok(topo)
}

/// One row of a metric time series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricRow {
    /// Which snapshot the value belongs to: a turn index or a file label.
    pub snapshot: String,
    pub metric: String,
    pub value: Rat,
}

/// Write metric rows as CSV (`snapshot,metric,value_num,value_den`).
pub fn write_metric_rows_csv<W: Write>(rows: &[MetricRow], mut out: W) -> Result<()> {
    writeln!(out, "snapshot,metric,value_num,value_den")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.snapshot,
            row.metric,
            row.value.numer(),
            row.value.denom()
        )?;
    }
    Ok(())
}

/// Parse a node-list file: one node id per line, `#` starts a comment.
pub fn parse_node_list(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let id: u64 = line.parse().map_err(|_| {
            Error::Parse(format!(
                "node list line {}: {:?} is not a node id",
                lineno + 1,
                line
            ))
        })?;
        out.push(id);
    }
    Ok(out)
}
