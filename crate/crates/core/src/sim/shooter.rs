//! The shooter agent: room-to-room random targeting along shortest paths.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{BuildingGraph, NodeId, NodeKind};

use super::Position;

/// Seconds spent at a target room before moving on.
pub const TARGET_DWELL_S: u32 = 5;

/// Draws an unvisited room with weight 1 / (1 + travel seconds from
/// `current`). `None` once every reachable room has been visited.
pub fn shooter_choose_target(
    g: &BuildingGraph,
    current: NodeId,
    visited: &[bool],
    rng: &mut ChaCha8Rng,
) -> Option<NodeId> {
    let candidates: Vec<(NodeId, f64)> = g
        .node_ids()
        .filter(|&n| g.kind(n) == NodeKind::Room && !visited[n.index()])
        .filter_map(|n| {
            g.travel_time(current, n)
                .map(|s| (n, 1.0 / (1.0 + f64::from(s))))
        })
        .collect();
    let total: f64 = candidates.iter().map(|(_, w)| w).sum();
    if candidates.is_empty() {
        return None;
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for &(n, w) in &candidates {
        acc += w;
        if u < acc {
            return Some(n);
        }
    }
    candidates.last().map(|&(n, _)| n)
}

#[derive(Clone, Debug)]
pub struct Shooter {
    pos: Position,
    visited: Vec<bool>,
    target: Option<NodeId>,
    path: VecDeque<NodeId>,
    ready_t: u32,
    rng: ChaCha8Rng,
}

impl Shooter {
    /// Places the shooter at `spawn` at t=0 and picks its first target.
    pub fn new(g: &BuildingGraph, spawn: NodeId, rng: ChaCha8Rng) -> Self {
        let mut visited = vec![false; g.node_count()];
        if g.kind(spawn) == NodeKind::Room {
            visited[spawn.index()] = true;
        }
        let mut s = Shooter {
            pos: Position::Node(spawn),
            visited,
            target: None,
            path: VecDeque::new(),
            ready_t: 1,
            rng,
        };
        s.retarget(g, spawn);
        s
    }

    fn retarget(&mut self, g: &BuildingGraph, at: NodeId) {
        self.target = shooter_choose_target(g, at, &self.visited, &mut self.rng);
        self.path.clear();
        if let Some(target) = self.target {
            self.visited[target.index()] = true;
            let (path, _) = g.shortest_path(at, target).expect("target is reachable");
            self.path.extend(path.into_iter().skip(1));
        }
    }

    pub fn pos(&self) -> Position {
        self.pos
    }

    pub fn target(&self) -> Option<NodeId> {
        self.target
    }

    pub fn has_visited(&self, n: NodeId) -> bool {
        self.visited[n.index()]
    }

    /// Advances to second `t`. Capacity never constrains the shooter.
    pub fn step(&mut self, g: &BuildingGraph, t: u32) {
        match self.pos {
            Position::Edge {
                to,
                entered,
                sojourn,
                ..
            } => {
                if t >= entered + sojourn {
                    self.pos = Position::Node(to);
                    if self.path.is_empty() {
                        self.retarget(g, to);
                        self.ready_t = t + TARGET_DWELL_S;
                    } else {
                        self.ready_t = t + 1;
                    }
                }
            }
            Position::Node(n) => {
                if t >= self.ready_t {
                    if let Some(next) = self.path.pop_front() {
                        let nb = g.neighbor(n, next).expect("path steps are adjacent");
                        self.pos = Position::Edge {
                            from: n,
                            to: next,
                            edge: nb.edge,
                            entered: t,
                            sojourn: nb.sojourn_s,
                        };
                    }
                }
            }
        }
    }

    /// Node used for line-of-sight checks at second `t`: the origin while on
    /// an edge, switching to the destination on the last travel second.
    pub fn node_at(&self, t: u32) -> NodeId {
        self.pos.node_at(t)
    }

    pub fn edge(&self) -> Option<usize> {
        match self.pos {
            Position::Edge { edge, .. } => Some(edge),
            Position::Node(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_bundled;
    use crate::rng::stream;

    #[test]
    fn single_unvisited_room_is_certain() {
        let g = load_bundled("acyclic_school").unwrap();
        let mut visited: Vec<bool> = g.node_ids().map(|n| g.kind(n) == NodeKind::Room).collect();
        visited[NodeId(30).index()] = false;
        let mut rng = stream(1, 0);
        for _ in 0..20 {
            assert_eq!(
                shooter_choose_target(&g, NodeId(1), &visited, &mut rng),
                Some(NodeId(30))
            );
        }
        visited[NodeId(30).index()] = true;
        assert_eq!(
            shooter_choose_target(&g, NodeId(1), &visited, &mut rng),
            None
        );
    }

    #[test]
    fn waits_five_seconds_at_target() {
        let g = load_bundled("acyclic_school").unwrap();
        let mut s = Shooter::new(&g, NodeId(2), stream(11, 0));
        let first = s.target().unwrap();
        let mut arrived = None;
        for t in 1..200 {
            s.step(&g, t);
            match (arrived, s.pos()) {
                (None, Position::Node(n)) if n == first => arrived = Some(t),
                (Some(ta), Position::Edge { entered, .. }) => {
                    assert_eq!(entered, ta + TARGET_DWELL_S);
                    return;
                }
                _ => {}
            }
        }
        panic!("shooter never left its first target");
    }
}
