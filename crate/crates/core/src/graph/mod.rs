//! Building environments as capacitated graphs.
//!
//! A [`BuildingGraph`] is immutable once assembled. Assembly precomputes the
//! all-pairs travel times (seconds), hop distances, line-of-sight sets and the
//! per-node time to the nearest exit, so planners and the simulator can share
//! one instance freely across threads.

mod file;
mod los;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{bundled_names, load_bundled, load_environment, load_environment_file};
pub use los::{visibility_from_walls, Wall};

/// Sentinel capacity of exit nodes (effectively unbounded).
pub const EXIT_CAPACITY: u32 = 999;
/// Walking speed used to derive default sojourn times from positions.
pub const WALKING_SPEED_M_S: f64 = 1.5;
/// Default occupancy of hall and room nodes.
pub const DEFAULT_NODE_CAPACITY: u32 = 20;
/// Default capacity of hallway (door-less) edges.
pub const DEFAULT_EDGE_CAPACITY: u32 = 20;

pub(crate) const UNREACHABLE: u32 = u32::MAX;

/// One-based node identifier, as used in environment files and routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        NodeId(index as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Room,
    Hall,
    Exit,
}

impl NodeKind {
    pub fn default_hardness(self) -> u32 {
        match self {
            NodeKind::Room => 5,
            NodeKind::Hall | NodeKind::Exit => 0,
        }
    }

    pub fn default_capacity(self) -> u32 {
        match self {
            NodeKind::Exit => EXIT_CAPACITY,
            NodeKind::Room | NodeKind::Hall => DEFAULT_NODE_CAPACITY,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Room => "room",
            NodeKind::Hall => "hall",
            NodeKind::Exit => "exit",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoorKind {
    #[default]
    None,
    Single,
    Double,
}

impl DoorKind {
    pub fn is_door(self) -> bool {
        !matches!(self, DoorKind::None)
    }

    /// Persons per second through the doorway; a plain hallway edge passes
    /// as many as it holds.
    pub fn throughput(self, capacity: u32) -> u32 {
        match self {
            DoorKind::None => capacity,
            DoorKind::Single => 2,
            DoorKind::Double => 4,
        }
    }

    pub fn default_capacity(self) -> u32 {
        match self {
            DoorKind::None => DEFAULT_EDGE_CAPACITY,
            DoorKind::Single => 2,
            DoorKind::Double => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub kind: NodeKind,
    pub hardness: u32,
    pub max_occupancy: u32,
    pub position: Option<[f64; 2]>,
}

impl NodeSpec {
    /// A node with the default hardness and capacity for its kind.
    pub fn new(id: u32, kind: NodeKind) -> Self {
        NodeSpec {
            id: NodeId(id),
            kind,
            hardness: kind.default_hardness(),
            max_occupancy: kind.default_capacity(),
            position: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a: NodeId,
    pub b: NodeId,
    pub sojourn_s: u32,
    pub capacity: u32,
    pub door_kind: DoorKind,
    pub throughput_per_s: u32,
}

impl EdgeSpec {
    pub fn new(a: u32, b: u32, sojourn_s: u32, door_kind: DoorKind) -> Self {
        let capacity = door_kind.default_capacity();
        EdgeSpec {
            a: NodeId(a),
            b: NodeId(b),
            sojourn_s,
            capacity,
            door_kind,
            throughput_per_s: door_kind.throughput(capacity),
        }
    }

    pub fn with_capacity(mut self, capacity: u32) -> Self {
        self.capacity = capacity;
        self.throughput_per_s = self.door_kind.throughput(capacity);
        self
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub node: NodeId,
    pub edge: usize,
    pub sojourn_s: u32,
}

/// A traversal direction of an undirected edge. Capacity is accounted per
/// direction, so every edge yields two of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirEdge(usize);

impl DirEdge {
    pub fn new(edge: usize, forward: bool) -> Self {
        DirEdge(2 * edge + usize::from(!forward))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }

    #[inline]
    pub fn edge(self) -> usize {
        self.0 / 2
    }

    #[inline]
    pub fn is_forward(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

/// Raw pieces of a graph before assembly.
#[derive(Clone, Debug, Default)]
pub struct GraphParts {
    pub name: String,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    /// Explicit line-of-sight sets, returned verbatim when present.
    pub los: Option<BTreeMap<NodeId, Vec<NodeId>>>,
    pub walls: Vec<Wall>,
    /// Precomputed exit times; recomputed when absent.
    pub exit_time: Option<BTreeMap<NodeId, u32>>,
}

#[derive(Clone, Debug)]
pub struct BuildingGraph {
    name: String,
    nodes: Vec<NodeSpec>,
    edges: Vec<EdgeSpec>,
    adjacency: Vec<Vec<Neighbor>>,
    los: Vec<Vec<NodeId>>,
    los_matrix: Vec<bool>,
    exit_time: Vec<u32>,
    travel: Vec<u32>,
    hops: Vec<u32>,
}

impl BuildingGraph {
    /// Builds the graph and its static precomputations without checking the
    /// type invariants; see [`BuildingGraph::validate`].
    pub fn assemble(parts: GraphParts) -> Result<Self> {
        let GraphParts {
            name,
            mut nodes,
            edges,
            los,
            walls,
            exit_time,
        } = parts;
        nodes.sort_by_key(|n| n.id);
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.id != NodeId::from_index(i) {
                return Err(Error::Invalid(vec![format!(
                    "node ids must be unique and contiguous from 1; found {} at position {}",
                    node.id,
                    i + 1
                )]));
            }
        }
        for e in &edges {
            for end in [e.a, e.b] {
                if end.0 == 0 || end.index() >= n {
                    return Err(Error::DanglingEndpoint {
                        a: e.a.0,
                        b: e.b.0,
                        missing: end.0,
                    });
                }
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a.index()].push(Neighbor {
                node: e.b,
                edge: i,
                sojourn_s: e.sojourn_s,
            });
            if e.a != e.b {
                adjacency[e.b.index()].push(Neighbor {
                    node: e.a,
                    edge: i,
                    sojourn_s: e.sojourn_s,
                });
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|nb| (nb.node, nb.sojourn_s, nb.edge));
        }

        let los: Vec<Vec<NodeId>> = match los {
            Some(map) => (0..n)
                .map(|i| {
                    let mut set = map.get(&NodeId::from_index(i)).cloned().unwrap_or_default();
                    set.sort();
                    set.dedup();
                    set
                })
                .collect(),
            None if nodes.iter().all(|nd| nd.position.is_some()) => {
                let points: Vec<[f64; 2]> = nodes.iter().map(|nd| nd.position.unwrap()).collect();
                visibility_from_walls(&points, &walls)
            }
            None => (0..n).map(|i| vec![NodeId::from_index(i)]).collect(),
        };
        let mut los_matrix = vec![false; n * n];
        for (i, set) in los.iter().enumerate() {
            for m in set {
                if m.index() < n {
                    los_matrix[i * n + m.index()] = true;
                }
            }
        }

        let mut graph = BuildingGraph {
            name,
            nodes,
            edges,
            adjacency,
            los,
            los_matrix,
            exit_time: Vec::new(),
            travel: Vec::new(),
            hops: Vec::new(),
        };
        graph.travel = graph.all_pairs_travel();
        graph.hops = graph.all_pairs_hops();
        graph.exit_time = match exit_time {
            Some(map) => (0..n)
                .map(|i| {
                    map.get(&NodeId::from_index(i))
                        .copied()
                        .unwrap_or(UNREACHABLE)
                })
                .collect(),
            None => multi_source_exit_times(&graph),
        };
        Ok(graph)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId::from_index)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.0 >= 1 && id.index() < self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeSpec> {
        if self.contains(id) {
            Ok(&self.nodes[id.index()])
        } else {
            Err(Error::UnknownNode(id))
        }
    }

    pub fn check(&self, id: NodeId) -> Result<()> {
        self.node(id).map(|_| ())
    }

    /// Panics on an unknown id; callers inside the crate validate ids first.
    #[inline]
    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    #[inline]
    pub fn is_exit(&self, id: NodeId) -> bool {
        self.kind(id) == NodeKind::Exit
    }

    #[inline]
    pub fn hardness(&self, id: NodeId) -> u32 {
        self.nodes[id.index()].hardness
    }

    pub fn exits(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Exit)
            .map(|n| n.id)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.kind == kind)
            .map(|n| n.id)
            .collect()
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &EdgeSpec {
        &self.edges[index]
    }

    /// Neighbors sorted ascending by node id.
    #[inline]
    pub fn neighbors(&self, id: NodeId) -> &[Neighbor] {
        &self.adjacency[id.index()]
    }

    pub fn neighbor(&self, from: NodeId, to: NodeId) -> Option<Neighbor> {
        self.adjacency
            .get(from.index())?
            .iter()
            .find(|nb| nb.node == to)
            .copied()
    }

    pub fn dir_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// Directed edge used when travelling `from -> to`.
    pub fn dir_edge(&self, from: NodeId, to: NodeId) -> Option<DirEdge> {
        let nb = self.neighbor(from, to)?;
        Some(DirEdge::new(nb.edge, self.edges[nb.edge].a == from))
    }

    /// Endpoints of a directed edge as (origin, destination).
    pub fn dir_edge_endpoints(&self, d: DirEdge) -> (NodeId, NodeId) {
        let e = &self.edges[d.edge()];
        if d.is_forward() {
            (e.a, e.b)
        } else {
            (e.b, e.a)
        }
    }

    pub fn los(&self, id: NodeId) -> &[NodeId] {
        &self.los[id.index()]
    }

    #[inline]
    pub fn sees(&self, from: NodeId, to: NodeId) -> bool {
        self.los_matrix[from.index() * self.nodes.len() + to.index()]
    }

    pub fn line_of_sight_set(&self, id: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(id)?;
        Ok(self.los(id).iter().copied().collect())
    }

    #[inline]
    pub fn exit_time(&self, id: NodeId) -> u32 {
        self.exit_time[id.index()]
    }

    pub fn exit_times(&self) -> BTreeMap<NodeId, u32> {
        self.node_ids().map(|n| (n, self.exit_time(n))).collect()
    }

    /// Shortest travel time in seconds, `None` if unreachable.
    #[inline]
    pub fn travel_time(&self, from: NodeId, to: NodeId) -> Option<u32> {
        let v = self.travel[from.index() * self.nodes.len() + to.index()];
        (v != UNREACHABLE).then_some(v)
    }

    /// Unweighted hop count, `None` if unreachable.
    #[inline]
    pub fn hop_distance(&self, from: NodeId, to: NodeId) -> Option<u32> {
        let v = self.hops[from.index() * self.nodes.len() + to.index()];
        (v != UNREACHABLE).then_some(v)
    }

    /// Minimum-sojourn path; among equal-length paths the lexicographically
    /// smallest node sequence wins.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<(Vec<NodeId>, u32)> {
        self.check(from)?;
        self.check(to)?;
        let total = self
            .travel_time(from, to)
            .ok_or(Error::Unreachable { from, to })?;
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let remaining = self.travel_time(cur, to).expect("on a shortest path");
            let next = self
                .neighbors(cur)
                .iter()
                .find(|nb| {
                    self.travel_time(nb.node, to)
                        .is_some_and(|d| d + nb.sojourn_s == remaining)
                })
                .expect("shortest path continues");
            path.push(next.node);
            cur = next.node;
        }
        Ok((path, total))
    }

    /// Every type-invariant violation as a human-readable line.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.nodes.len();

        for node in &self.nodes {
            if node.kind == NodeKind::Exit && node.max_occupancy != EXIT_CAPACITY {
                out.push(format!(
                    "exit node {} has max_occupancy {} (expected {})",
                    node.id, node.max_occupancy, EXIT_CAPACITY
                ));
            }
            if node.max_occupancy == 0 {
                out.push(format!("node {} has zero max_occupancy", node.id));
            }
        }
        let max_hall = self
            .nodes
            .iter()
            .filter(|x| x.kind == NodeKind::Hall)
            .map(|x| x.hardness)
            .max();
        let min_room = self
            .nodes
            .iter()
            .filter(|x| x.kind == NodeKind::Room)
            .map(|x| x.hardness)
            .min();
        if let (Some(h), Some(r)) = (max_hall, min_room) {
            if h > r {
                out.push(format!("hall hardness {h} exceeds room hardness {r}"));
            }
        }

        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.a == e.b {
                out.push(format!("edge {}-{} is a self loop", e.a, e.b));
            }
            if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                out.push(format!("duplicate edge {}-{}", e.a, e.b));
            }
            if e.sojourn_s == 0 {
                out.push(format!("edge {}-{} has zero sojourn time", e.a, e.b));
            }
            if e.capacity == 0 {
                out.push(format!("edge {}-{} has zero capacity", e.a, e.b));
            }
            if e.throughput_per_s != e.door_kind.throughput(e.capacity) {
                out.push(format!(
                    "edge {}-{} throughput {} does not match door kind {:?}",
                    e.a, e.b, e.throughput_per_s, e.door_kind
                ));
            }
        }

        for i in 0..n {
            let a = NodeId::from_index(i);
            if !self.sees(a, a) {
                out.push(format!("line of sight of node {a} does not include itself"));
            }
            for m in self.los(a) {
                if !self.contains(*m) {
                    out.push(format!("line of sight of node {a} names unknown node {m}"));
                }
            }
            for j in (i + 1)..n {
                let b = NodeId::from_index(j);
                if self.sees(a, b) != self.sees(b, a) {
                    out.push(format!(
                        "line of sight is asymmetric between nodes {a} and {b}"
                    ));
                }
            }
        }

        if self.exits().next().is_none() {
            out.push("environment has no exit node".to_string());
        }
        let recomputed = multi_source_exit_times(self);
        for (i, (&stored, &fresh)) in self.exit_time.iter().zip(&recomputed).enumerate() {
            let id = NodeId::from_index(i);
            if stored == UNREACHABLE {
                out.push(format!("node {id} has no path to any exit"));
                continue;
            }
            if (stored == 0) != (self.kind(id) == NodeKind::Exit) {
                out.push(format!(
                    "exit_time of node {id} is {stored} but it is {}an exit",
                    if self.kind(id) == NodeKind::Exit {
                        ""
                    } else {
                        "not "
                    }
                ));
            }
            if stored != fresh {
                out.push(format!(
                    "exit_time of node {id} is {stored}, recomputation gives {fresh}"
                ));
            }
        }
        out
    }

    fn all_pairs_travel(&self) -> Vec<u32> {
        let n = self.nodes.len();
        let mut out = vec![UNREACHABLE; n * n];
        for s in 0..n {
            let row = &mut out[s * n..(s + 1) * n];
            dijkstra_into(self, &[s], row);
        }
        out
    }

    fn all_pairs_hops(&self) -> Vec<u32> {
        let n = self.nodes.len();
        let mut out = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            let row = &mut out[s * n..(s + 1) * n];
            row[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for nb in &self.adjacency[u] {
                    let v = nb.node.index();
                    if row[v] == UNREACHABLE {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        out
    }
}

fn dijkstra_into(g: &BuildingGraph, sources: &[usize], dist: &mut [u32]) {
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0;
        heap.push(Reverse((0u32, s)));
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for nb in &g.adjacency[u] {
            let v = nb.node.index();
            let nd = d + nb.sojourn_s;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
}

fn multi_source_exit_times(g: &BuildingGraph) -> Vec<u32> {
    let sources: Vec<usize> = g.exits().map(NodeId::index).collect();
    let mut dist = vec![UNREACHABLE; g.node_count()];
    dijkstra_into(g, &sources, &mut dist);
    dist
}

/// Seconds from each node to its nearest exit, via a multi-source Dijkstra
/// seeded at every exit.
pub fn compute_exit_times(g: &BuildingGraph) -> Result<BTreeMap<NodeId, u32>> {
    if g.exits().next().is_none() {
        return Err(Error::NoExit);
    }
    let dist = multi_source_exit_times(g);
    let mut out = BTreeMap::new();
    for (i, d) in dist.into_iter().enumerate() {
        let id = NodeId::from_index(i);
        if d == UNREACHABLE {
            return Err(Error::Disconnected(id));
        }
        out.insert(id, d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: u32) -> BuildingGraph {
        let mut nodes: Vec<NodeSpec> = (1..n).map(|i| NodeSpec::new(i, NodeKind::Hall)).collect();
        nodes.push(NodeSpec::new(n, NodeKind::Exit));
        let edges = (1..n)
            .map(|i| EdgeSpec::new(i, i + 1, i, DoorKind::None))
            .collect();
        BuildingGraph::assemble(GraphParts {
            name: "line".into(),
            nodes,
            edges,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn path_to_self_is_trivial() {
        let g = line(4);
        assert_eq!(
            g.shortest_path(NodeId(2), NodeId(2)).unwrap(),
            (vec![NodeId(2)], 0)
        );
    }

    #[test]
    fn exit_times_on_a_line() {
        let g = line(4);
        // sojourns 1, 2, 3 towards the exit at node 4
        let t = compute_exit_times(&g).unwrap();
        assert_eq!(t[&NodeId(4)], 0);
        assert_eq!(t[&NodeId(3)], 3);
        assert_eq!(t[&NodeId(1)], 6);
        assert!(g.validate().is_empty(), "{:?}", g.validate());
    }

    #[test]
    fn lexicographic_tie_break() {
        // 1 -> {2,3} -> 4 with equal lengths
        let nodes = vec![
            NodeSpec::new(1, NodeKind::Hall),
            NodeSpec::new(2, NodeKind::Hall),
            NodeSpec::new(3, NodeKind::Hall),
            NodeSpec::new(4, NodeKind::Exit),
        ];
        let edges = vec![
            EdgeSpec::new(1, 3, 2, DoorKind::None),
            EdgeSpec::new(1, 2, 2, DoorKind::None),
            EdgeSpec::new(3, 4, 2, DoorKind::None),
            EdgeSpec::new(2, 4, 2, DoorKind::None),
        ];
        let g = BuildingGraph::assemble(GraphParts {
            nodes,
            edges,
            ..Default::default()
        })
        .unwrap();
        let (p, len) = g.shortest_path(NodeId(1), NodeId(4)).unwrap();
        assert_eq!(p, vec![NodeId(1), NodeId(2), NodeId(4)]);
        assert_eq!(len, 4);
    }

    #[test]
    fn unreachable_and_unknown() {
        let nodes = vec![
            NodeSpec::new(1, NodeKind::Hall),
            NodeSpec::new(2, NodeKind::Exit),
        ];
        let g = BuildingGraph::assemble(GraphParts {
            nodes,
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(
            g.shortest_path(NodeId(1), NodeId(2)),
            Err(Error::Unreachable { .. })
        ));
        assert!(matches!(
            g.shortest_path(NodeId(1), NodeId(9)),
            Err(Error::UnknownNode(NodeId(9)))
        ));
        assert!(matches!(
            compute_exit_times(&g),
            Err(Error::Disconnected(NodeId(1)))
        ));
    }

    #[test]
    fn asymmetric_los_is_named() {
        let mut los = BTreeMap::new();
        los.insert(NodeId(1), vec![NodeId(1), NodeId(2)]);
        los.insert(NodeId(2), vec![NodeId(2)]);
        let g = BuildingGraph::assemble(GraphParts {
            nodes: vec![
                NodeSpec::new(1, NodeKind::Hall),
                NodeSpec::new(2, NodeKind::Exit),
            ],
            edges: vec![EdgeSpec::new(1, 2, 1, DoorKind::Double)],
            los: Some(los),
            ..Default::default()
        })
        .unwrap();
        let v = g.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("between nodes 1 and 2"));
    }

    #[test]
    fn stale_exit_time_is_reported() {
        let mut stale = BTreeMap::new();
        stale.insert(NodeId(1), 7);
        stale.insert(NodeId(2), 0);
        let g = BuildingGraph::assemble(GraphParts {
            nodes: vec![
                NodeSpec::new(1, NodeKind::Hall),
                NodeSpec::new(2, NodeKind::Exit),
            ],
            edges: vec![EdgeSpec::new(1, 2, 3, DoorKind::Double)],
            exit_time: Some(stale),
            ..Default::default()
        })
        .unwrap();
        let v = g.validate();
        assert_eq!(
            v,
            vec!["exit_time of node 1 is 7, recomputation gives 3".to_string()]
        );
    }

    #[test]
    fn dir_edges_are_per_direction() {
        let g = line(3);
        let f = g.dir_edge(NodeId(1), NodeId(2)).unwrap();
        let r = g.dir_edge(NodeId(2), NodeId(1)).unwrap();
        assert_ne!(f, r);
        assert_eq!(f.edge(), r.edge());
        assert_eq!(g.dir_edge_endpoints(r), (NodeId(2), NodeId(1)));
        assert!(g.dir_edge(NodeId(1), NodeId(3)).is_none());
    }
}
