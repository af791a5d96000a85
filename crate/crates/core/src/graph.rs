//! Undirected labelled topologies and the graph utilities the game needs:
//! BFS distances, connectivity, exhaustive enumeration of small graphs, and
//! plain-text import/export.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Player classes. `TypeA` players are the heavily weighted "major" nodes,
/// `TypeB` the minor ones; link upkeep and distance weights differ per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlayerType {
    TypeA,
    TypeB,
}

impl PlayerType {
    pub fn letter(self) -> char {
        match self {
            PlayerType::TypeA => 'A',
            PlayerType::TypeB => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'A' | 'a' => Some(PlayerType::TypeA),
            'B' | 'b' => Some(PlayerType::TypeB),
            _ => None,
        }
    }
}

impl std::fmt::Display for PlayerType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Single-link edit applied to a topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkAction {
    Add,
    Remove,
}

/// Order a pair so `(small, large)`; rejects self-pairs elsewhere.
pub fn canonical_pair(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// An undirected graph whose nodes carry a [`PlayerType`].
///
/// Node ids are dense `0..n`. The structure is plain data: the game engine
/// clones and edits copies when it evaluates candidate moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    types: Vec<PlayerType>,
    adjacency: Vec<BTreeSet<NodeId>>,
    link_count: usize,
}

impl Topology {
    pub fn new(types: Vec<PlayerType>) -> Self {
        let n = types.len();
        Topology {
            types,
            adjacency: vec![BTreeSet::new(); n],
            link_count: 0,
        }
    }

    /// Empty topology with `n_a` major nodes (`0..n_a`) followed by `n_b`
    /// minor nodes.
    pub fn with_split(n_a: usize, n_b: usize) -> Self {
        let mut types = vec![PlayerType::TypeA; n_a];
        types.extend(std::iter::repeat(PlayerType::TypeB).take(n_b));
        Topology::new(types)
    }

    pub fn node_count(&self) -> usize {
        self.types.len()
    }

    /// Append a new isolated node and return its id.
    pub fn add_node(&mut self, t: PlayerType) -> NodeId {
        self.types.push(t);
        self.adjacency.push(BTreeSet::new());
        (self.types.len() - 1) as NodeId
    }

    pub fn link_count(&self) -> usize {
        self.link_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.types.len() as NodeId
    }

    pub fn player_type(&self, node: NodeId) -> PlayerType {
        self.types[node as usize]
    }

    pub fn types(&self) -> &[PlayerType] {
        &self.types
    }

    pub fn nodes_of_type(&self, t: PlayerType) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |&i| self.player_type(i) == t)
    }

    pub fn count_of_type(&self, t: PlayerType) -> usize {
        self.types.iter().filter(|&&x| x == t).count()
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if (node as usize) < self.types.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    pub fn has_link(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u as usize)
            .is_some_and(|set| set.contains(&v))
    }

    pub fn neighbors(&self, node: NodeId) -> &BTreeSet<NodeId> {
        &self.adjacency[node as usize]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn add_link(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if self.has_link(u, v) {
            let (a, b) = canonical_pair(u, v);
            return Err(Error::DuplicateLink(a, b));
        }
        self.adjacency[u as usize].insert(v);
        self.adjacency[v as usize].insert(u);
        self.link_count += 1;
        Ok(())
    }

    pub fn remove_link(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !self.has_link(u, v) {
            let (a, b) = canonical_pair(u, v);
            return Err(Error::MissingLink(a, b));
        }
        self.adjacency[u as usize].remove(&v);
        self.adjacency[v as usize].remove(&u);
        self.link_count -= 1;
        Ok(())
    }

    pub fn apply(&mut self, pair: (NodeId, NodeId), action: LinkAction) -> Result<()> {
        match action {
            LinkAction::Add => self.add_link(pair.0, pair.1),
            LinkAction::Remove => self.remove_link(pair.0, pair.1),
        }
    }

    /// Copy of the topology with one link edit applied.
    pub fn with_change(&self, pair: (NodeId, NodeId), action: LinkAction) -> Result<Topology> {
        let mut next = self.clone();
        next.apply(pair, action)?;
        Ok(next)
    }

    /// All links in canonical order.
    pub fn links(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.link_count);
        for u in self.nodes() {
            for &v in &self.adjacency[u as usize] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// All un-linked pairs in canonical order.
    pub fn non_links(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.node_count() as NodeId;
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if !self.has_link(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Hop counts from `source` to every node; `None` marks unreachable.
    pub fn shortest_distances(&self, source: NodeId) -> DistanceTable {
        let n = self.node_count();
        let mut hops = vec![None; n];
        hops[source as usize] = Some(0);
        let mut frontier = std::collections::VecDeque::new();
        frontier.push_back(source);
        while let Some(u) = frontier.pop_front() {
            let next = hops[u as usize].expect("queued nodes have distances") + 1;
            for &v in &self.adjacency[u as usize] {
                if hops[v as usize].is_none() {
                    hops[v as usize] = Some(next);
                    frontier.push_back(v);
                }
            }
        }
        DistanceTable { source, hops }
    }

    pub fn is_connected(&self) -> bool {
        match self.node_count() {
            0 | 1 => true,
            _ => self.shortest_distances(0).unreachable_count() == 0,
        }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        for start in self.nodes() {
            if seen[start as usize] {
                continue;
            }
            let table = self.shortest_distances(start);
            let members: Vec<NodeId> = self
                .nodes()
                .filter(|&i| table.hops[i as usize].is_some())
                .collect();
            for &m in &members {
                seen[m as usize] = true;
            }
            out.push(members);
        }
        out
    }
}

/// BFS result from a fixed source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    pub source: NodeId,
    pub hops: Vec<Option<u32>>,
}

impl DistanceTable {
    pub fn hop(&self, target: NodeId) -> Option<u32> {
        self.hops[target as usize]
    }

    /// Nodes (other than the source) the source cannot reach.
    pub fn unreachable_count(&self) -> u32 {
        self.hops.iter().filter(|h| h.is_none()).count() as u32
    }
}

/// Cap on exhaustive graph enumeration; 2^28 graphs at 8 nodes is the limit
/// of what brute force handles in reasonable time.
pub const ENUMERATION_MAX_NODES: usize = 8;

/// Unordered node pairs of an `n`-node graph in canonical order; bit `k` of an
/// edge mask refers to `slots[k]`.
pub fn edge_slots(n: usize) -> Vec<(NodeId, NodeId)> {
    let n = n as NodeId;
    let mut slots = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            slots.push((u, v));
        }
    }
    slots
}

/// Build the topology whose links are the set bits of `mask` over `slots`.
pub fn from_edge_mask(types: &[PlayerType], slots: &[(NodeId, NodeId)], mask: u64) -> Topology {
    let mut topo = Topology::new(types.to_vec());
    for (bit, &(u, v)) in slots.iter().enumerate() {
        if mask >> bit & 1 == 1 {
            topo.add_link(u, v).expect("slots are distinct valid pairs");
        }
    }
    topo
}

/// Every labelled graph on `n_a + n_b` nodes (majors first), optionally
/// restricted to connected ones. Guarded by [`ENUMERATION_MAX_NODES`].
pub fn enumerate_labeled_graphs(
    n_a: usize,
    n_b: usize,
    connected_only: bool,
) -> Result<Vec<Topology>> {
    let n = n_a + n_b;
    if n > ENUMERATION_MAX_NODES {
        return Err(Error::SizeGuard {
            what: "labelled graph enumeration",
            max: ENUMERATION_MAX_NODES,
            got: n,
        });
    }
    let template = Topology::with_split(n_a, n_b);
    let slots = edge_slots(n);
    let mut out = Vec::new();
    for mask in 0..(1u64 << slots.len()) {
        let topo = from_edge_mask(template.types(), &slots, mask);
        if !connected_only || topo.is_connected() {
            out.push(topo);
        }
    }
    Ok(out)
}

/// Parse an edge list: one `u v` pair per line, `#` starts a comment, blank
/// lines ignored. Node ids are arbitrary non-negative integers.
pub fn parse_edge_list(text: &str) -> Result<Vec<(u64, u64)>> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (u, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => {
                return Err(Error::Parse(format!(
                    "edge list line {}: expected `u v`, got {:?}",
                    lineno + 1,
                    raw
                )))
            }
        };
        let parse = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| {
                Error::Parse(format!(
                    "edge list line {}: {:?} is not a node id",
                    lineno + 1,
                    s
                ))
            })
        };
        edges.push((parse(u)?, parse(v)?));
    }
    Ok(edges)
}

/// Parse a node-type file: one `u A` / `u B` per line, comments as in edge
/// lists.
pub fn parse_type_assignments(text: &str) -> Result<BTreeMap<u64, PlayerType>> {
    let mut types = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let bad = |what: &str| {
            Error::Parse(format!(
                "type file line {}: {what} in {:?}",
                lineno + 1,
                raw
            ))
        };
        let (id_text, ty_text) = match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(t), None) => (u, t),
            _ => return Err(bad("expected `node A|B`")),
        };
        let id: u64 = id_text.parse().map_err(|_| bad("bad node id"))?;
        let ty = ty_text
            .chars()
            .next()
            .filter(|_| ty_text.len() == 1)
            .and_then(PlayerType::from_letter)
            .ok_or_else(|| bad("type must be A or B"))?;
        if types.insert(id, ty).is_some() {
            return Err(bad("duplicate node id"));
        }
    }
    Ok(types)
}

/// Assemble a topology from parsed files. Every node mentioned in the edge
/// list must have a type; typed nodes absent from the edge list become
/// isolated nodes. Returns the topology plus the original id of each dense
/// node index.
pub fn build_topology(
    edges: &[(u64, u64)],
    types: &BTreeMap<u64, PlayerType>,
) -> Result<(Topology, Vec<u64>)> {
    for &(u, v) in edges {
        for id in [u, v] {
            if !types.contains_key(&id) {
                return Err(Error::Parse(format!(
                    "node {id} appears in the edge list but has no type assignment"
                )));
            }
        }
    }
    let original_ids: Vec<u64> = types.keys().copied().collect();
    let index_of: BTreeMap<u64, NodeId> = original_ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i as NodeId))
        .collect();
    let mut topo = Topology::new(original_ids.iter().map(|id| types[id]).collect());
    for &(u, v) in edges {
        topo.add_link(index_of[&u], index_of[&v])?;
    }
    Ok((topo, original_ids))
}

/// Render a topology back to edge-list text (dense ids, canonical order).
pub fn render_edge_list(topo: &Topology) -> String {
    let mut out = String::new();
    for (u, v) in topo.links() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}
