#![allow(dead_code)]

use std::collections::BTreeMap;

use egress::graph::{BuildingGraph, DoorKind, EdgeSpec, GraphParts, NodeId, NodeKind, NodeSpec};
use egress::planner::{reward, CapacityLedger, Outcome, RewardParams};
use egress::threat::{transition_harm_probability, HarmField};
use proptest::prelude::*;
use rand::Rng;

/// Printed-table rounding: half-up to two decimals.
pub fn round2(x: f64) -> f64 {
    ((x * 100.0) + 0.5 + 1e-9).floor() / 100.0
}

pub const TOY_ENTITIES: [&str; 11] = [
    "N1", "N2", "N3", "N4", "N5", "N6", "E1-2", "E2-3", "E2-4", "E4-5", "E4-6",
];

/// Shooter location table for the toy graph, shooter at node 4, t = 0..=7.
pub const TABLE_LOCATION: [[f64; 8]; 11] = [
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.25, 0.13, 0.05, 0.02],
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.06],
    [1.00, 0.25, 0.06, 0.02, 0.00, 0.00, 0.13, 0.13],
    [0.00, 0.00, 0.00, 0.25, 0.19, 0.11, 0.06, 0.03],
    [0.00, 0.00, 0.00, 0.00, 0.25, 0.19, 0.11, 0.06],
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.06, 0.09, 0.11],
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.06, 0.09, 0.04],
    [0.00, 0.25, 0.31, 0.33, 0.09, 0.09, 0.10, 0.14],
    [0.00, 0.25, 0.31, 0.08, 0.15, 0.22, 0.15, 0.12],
    [0.00, 0.25, 0.31, 0.33, 0.08, 0.15, 0.22, 0.31],
];

/// Harm table for the toy graph, nodes 1..=6, t = 0..=7.
pub const TABLE_HARM: [[f64; 8]; 6] = [
    [0.00, 0.00, 0.00, 0.00, 0.25, 0.13, 0.09, 0.11],
    [1.00, 0.25, 0.31, 0.33, 0.25, 0.13, 0.13, 0.14],
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.06, 0.09, 0.06],
    [1.00, 0.25, 0.31, 0.33, 0.25, 0.22, 0.22, 0.31],
    [0.00, 0.25, 0.31, 0.25, 0.19, 0.22, 0.15, 0.12],
    [1.00, 0.25, 0.31, 0.33, 0.25, 0.19, 0.22, 0.31],
];

pub const TOY_EDGES: [(u32, u32); 5] = [(1, 2), (2, 3), (2, 4), (4, 5), (4, 6)];

/// Cell tolerance for the printed tables: one unit in the last printed digit.
pub const TABLE_TOL: f64 = 0.01 + 1e-9;

pub fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&x| NodeId(x)).collect()
}

// ---------------------------------------------------------------------------
// Random graphs

/// A connected random graph before assembly: a random spanning tree plus
/// extra edges, with at least one exit.
#[derive(Clone, Debug)]
pub struct Sketch {
    pub kinds: Vec<NodeKind>,
    /// (a, b, sojourn, door) with 1-based ids.
    pub edges: Vec<(u32, u32, u32, DoorKind)>,
    /// Extra symmetric sight lines besides every node seeing itself.
    pub los: Vec<(u32, u32)>,
}

fn kind_of(code: u8) -> NodeKind {
    match code % 3 {
        0 => NodeKind::Hall,
        1 => NodeKind::Room,
        _ => NodeKind::Exit,
    }
}

fn door_of(code: u8) -> DoorKind {
    match code % 4 {
        1 => DoorKind::Single,
        2 => DoorKind::Double,
        _ => DoorKind::None,
    }
}

impl Sketch {
    /// `tree[i - 1]` attaches node `i + 1` (0-based `i`) to an earlier node.
    pub fn from_codes(
        kinds: Vec<u8>,
        tree: Vec<(usize, u32, u8)>,
        extra: Vec<(usize, usize, u32)>,
        los: Vec<(usize, usize)>,
    ) -> Self {
        let n = kinds.len();
        let mut kinds: Vec<NodeKind> = kinds.into_iter().map(kind_of).collect();
        if !kinds.contains(&NodeKind::Exit) {
            kinds[n - 1] = NodeKind::Exit;
        }
        let mut edges = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (i, &(parent, sojourn, door)) in tree.iter().enumerate() {
            let child = i + 1;
            let p = parent % child;
            seen.insert((p, child));
            edges.push((p as u32 + 1, child as u32 + 1, sojourn, door_of(door)));
        }
        for (a, b, sojourn) in extra {
            let (a, b) = (a % n, b % n);
            let key = (a.min(b), a.max(b));
            if a != b && seen.insert(key) {
                edges.push((key.0 as u32 + 1, key.1 as u32 + 1, sojourn, DoorKind::None));
            }
        }
        let los = los
            .into_iter()
            .map(|(a, b)| ((a % n) as u32 + 1, (b % n) as u32 + 1))
            .collect();
        Sketch { kinds, edges, los }
    }

    fn parts(&self, capacity: Option<u32>) -> GraphParts {
        let nodes = self
            .kinds
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let mut node = NodeSpec::new(i as u32 + 1, k);
                if let Some(c) = capacity {
                    node.max_occupancy = c;
                }
                node
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|&(a, b, s, door)| match capacity {
                Some(c) => EdgeSpec::new(a, b, s, DoorKind::None).with_capacity(c),
                None => EdgeSpec::new(a, b, s, door),
            })
            .collect();
        let mut los: BTreeMap<NodeId, Vec<NodeId>> = (1..=self.kinds.len() as u32)
            .map(|i| (NodeId(i), vec![NodeId(i)]))
            .collect();
        for &(a, b) in &self.los {
            los.get_mut(&NodeId(a)).unwrap().push(NodeId(b));
            los.get_mut(&NodeId(b)).unwrap().push(NodeId(a));
        }
        GraphParts {
            name: "random".into(),
            nodes,
            edges,
            los: Some(los),
            ..Default::default()
        }
    }

    pub fn graph(&self) -> BuildingGraph {
        BuildingGraph::assemble(self.parts(None)).unwrap()
    }

    /// Every node and edge holds `capacity`, and no edge is a doorway.
    pub fn with_capacity(&self, capacity: u32) -> BuildingGraph {
        BuildingGraph::assemble(self.parts(Some(capacity))).unwrap()
    }
}

/// A random sketch with `min..=max` nodes and sojourns in `1..=max_sojourn`.
pub fn random_sketch<R: Rng>(rng: &mut R, min: usize, max: usize, max_sojourn: u32) -> Sketch {
    let n = rng.gen_range(min..=max);
    let kinds = (0..n).map(|_| rng.gen_range(0..3u8)).collect();
    let tree = (1..n)
        .map(|i| {
            (
                rng.gen_range(0..i),
                rng.gen_range(1..=max_sojourn),
                rng.gen_range(0..4u8),
            )
        })
        .collect();
    let extra = (0..rng.gen_range(0..=n / 2))
        .map(|_| {
            (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(1..=max_sojourn),
            )
        })
        .collect();
    let los = (0..rng.gen_range(0..=n))
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    Sketch::from_codes(kinds, tree, extra, los)
}

pub fn arb_sketch(min: usize, max: usize, max_sojourn: u32) -> impl Strategy<Value = Sketch> {
    (min..=max).prop_flat_map(move |n| {
        let tree: Vec<_> = (1..n).map(|i| (0..i, 1..=max_sojourn, 0..4u8)).collect();
        (
            proptest::collection::vec(0..3u8, n),
            tree,
            proptest::collection::vec((0..n, 0..n, 1..=max_sojourn), 0..=n / 2),
            proptest::collection::vec((0..n, 0..n), 0..=n),
        )
            .prop_map(|(k, t, e, l)| Sketch::from_codes(k, t, e, l))
    })
}

// ---------------------------------------------------------------------------
// Shortest-path oracle

/// All-pairs travel seconds by Floyd–Warshall; `u64::MAX` when unreachable.
pub fn floyd_warshall(g: &BuildingGraph) -> Vec<Vec<u64>> {
    let n = g.node_count();
    let mut d = vec![vec![u64::MAX; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in g.edges() {
        let (a, b) = (e.a.index(), e.b.index());
        let s = u64::from(e.sojourn_s);
        d[a][b] = d[a][b].min(s);
        d[b][a] = d[b][a].min(s);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != u64::MAX && d[k][j] != u64::MAX && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Exit times as the minimum Floyd–Warshall distance to any exit.
pub fn exit_times_oracle(g: &BuildingGraph) -> Vec<u64> {
    let d = floyd_warshall(g);
    g.node_ids()
        .map(|n| {
            g.exits()
                .map(|e| d[n.index()][e.index()])
                .min()
                .unwrap_or(u64::MAX)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Value-iteration oracle

/// Action value: death with probability `p`, otherwise reward plus the
/// continuation.
pub fn action_value(p: f64, penalty: f64, r: f64, next: f64) -> f64 {
    if p >= 1.0 {
        penalty
    } else if next == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        p * penalty + (1.0 - p) * (r + next)
    }
}

/// Cells a single move holds: the destination on arrival and the directed
/// edge for its first second (doors) or every travel second.
fn move_feasible(
    g: &BuildingGraph,
    ledger: &CapacityLedger,
    from: NodeId,
    to: NodeId,
    t: u32,
) -> bool {
    let nb = g.neighbor(from, to).unwrap();
    let arrive = t + nb.sojourn_s + 1;
    if arrive > ledger.horizon_s() || ledger.node_avail(arrive, to) == 0 {
        return false;
    }
    let dir = g.dir_edge(from, to).unwrap();
    let held = if g.edge(nb.edge).door_kind.is_door() {
        1
    } else {
        nb.sojourn_s
    };
    (1..=held).all(|s| ledger.edge_avail(t + s, dir) > 0)
}

/// Best value over every feasible action sequence from (n, t), by plain
/// recursion with no memoisation.
pub fn brute_force_value(
    g: &BuildingGraph,
    h: &HarmField,
    ledger: &CapacityLedger,
    params: &RewardParams,
    n: NodeId,
    t: u32,
) -> f64 {
    let horizon = ledger.horizon_s();
    if g.is_exit(n) {
        return params.reward_max * f64::from(horizon - t);
    }
    if t >= horizon {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    if ledger.node_avail(t + 1, n) > 0 {
        let p = transition_harm_probability(h, g, n, n, t).unwrap();
        let r = reward(g, n, n, Outcome::Normal, params).unwrap();
        let next = brute_force_value(g, h, ledger, params, n, t + 1);
        best = best.max(action_value(p, params.penalty_max, r, next));
    }
    for nb in g.neighbors(n) {
        if !move_feasible(g, ledger, n, nb.node, t) {
            continue;
        }
        let p = transition_harm_probability(h, g, n, nb.node, t).unwrap();
        let r = reward(g, n, nb.node, Outcome::Normal, params).unwrap();
        let next = brute_force_value(g, h, ledger, params, nb.node, t + nb.sojourn_s + 1);
        best = best.max(action_value(p, params.penalty_max, r, next));
    }
    best
}

/// Expected return of following `steps` from `t0`, evaluated backward.
/// A route stopping short of an exit before the horizon is worth negative
/// infinity.
pub fn route_value(
    g: &BuildingGraph,
    h: &HarmField,
    horizon: u32,
    params: &RewardParams,
    steps: &[NodeId],
    t0: u32,
) -> f64 {
    let mut legs = Vec::new();
    let mut t = t0;
    for w in steps.windows(2) {
        legs.push((w[0], w[1], t));
        t += if w[0] == w[1] {
            1
        } else {
            g.neighbor(w[0], w[1]).unwrap().sojourn_s + 1
        };
    }
    let last = *steps.last().unwrap();
    let mut v = if g.is_exit(last) {
        params.reward_max * f64::from(horizon - t)
    } else if t >= horizon {
        0.0
    } else {
        f64::NEG_INFINITY
    };
    for &(from, to, t) in legs.iter().rev() {
        let p = transition_harm_probability(h, g, from, to, t).unwrap();
        let r = reward(g, from, to, Outcome::Normal, params).unwrap();
        v = action_value(p, params.penalty_max, r, v);
    }
    v
}

/// Harm rows with a mix of zeros, certain harm and uniform draws.
pub fn random_harm<R: Rng>(rng: &mut R, nodes: usize, horizon: u32) -> HarmField {
    let rows: Vec<Vec<f64>> = (0..=horizon)
        .map(|_| {
            (0..nodes)
                .map(|_| match rng.gen_range(0..10) {
                    0..=3 => 0.0,
                    4 => 1.0,
                    _ => rng.gen::<f64>(),
                })
                .collect()
        })
        .collect();
    HarmField::from_rows(&rows)
}

/// A fresh ledger with roughly one cell in eight closed or squeezed.
pub fn random_ledger<R: Rng>(rng: &mut R, g: &BuildingGraph, horizon: u32) -> CapacityLedger {
    let mut ledger = CapacityLedger::new(g, horizon);
    for t in 0..=horizon {
        for n in g.node_ids() {
            if rng.gen_range(0..8) == 0 {
                ledger.set_node_avail(t, n, rng.gen_range(0..2));
            }
        }
        for e in 0..g.dir_edge_count() {
            if rng.gen_range(0..8) == 0 {
                let d = egress::graph::DirEdge::new(e / 2, e % 2 == 0);
                ledger.set_edge_avail(t, d, 0);
            }
        }
    }
    ledger
}
