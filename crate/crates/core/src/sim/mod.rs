//! Seeded discrete-time simulation of an evacuation under an active shooter.
//!
//! Time advances in whole seconds up to the horizon. Within a second the
//! shooter moves first, then door tokens from the previous second and every
//! token given back during it are returned, then evacuees act in ascending
//! id order, then every evacuee is adjudicated against the shooter, and
//! finally the second is recorded.

mod config;
mod engine;
mod resource;
mod shooter;

use serde::Serialize;

use crate::graph::{BuildingGraph, NodeId};

pub use config::{Distribution, PlannerKind, ReplanPolicy, ScenarioConfig};
pub use engine::{run_simulation, run_simulation_on};
pub use resource::Resource;
pub use shooter::{shooter_choose_target, Shooter, TARGET_DWELL_S};

/// Hop distance within which being seen by the shooter is fatal.
pub const LETHAL_HOPS: u32 = 3;

/// Where an agent is during a second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Position {
    Node(NodeId),
    Edge {
        from: NodeId,
        to: NodeId,
        edge: usize,
        /// First second spent on the edge.
        entered: u32,
        sojourn: u32,
    },
}

impl Position {
    /// Node an occupant counts as being at: the origin while travelling,
    /// the destination from the last travel second on.
    pub fn node_at(&self, t: u32) -> NodeId {
        match *self {
            Position::Node(n) => n,
            Position::Edge {
                from,
                to,
                entered,
                sojourn,
                ..
            } => {
                if t + 1 >= entered + sojourn {
                    to
                } else {
                    from
                }
            }
        }
    }

    pub fn edge(&self) -> Option<usize> {
        match *self {
            Position::Edge { edge, .. } => Some(edge),
            Position::Node(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Casualty,
    InLos,
    Safe,
}

/// Casualty when seen from within three hops or sharing the shooter's edge;
/// seen from further away only counts toward line-of-sight time.
pub fn adjudicate(g: &BuildingGraph, evac: Position, shooter: Position, t: u32) -> Verdict {
    if let (Some(a), Some(b)) = (evac.edge(), shooter.edge()) {
        if a == b {
            return Verdict::Casualty;
        }
    }
    let e = evac.node_at(t);
    let s = shooter.node_at(t);
    if !g.sees(s, e) {
        return Verdict::Safe;
    }
    match g.hop_distance(e, s) {
        Some(d) if d <= LETHAL_HOPS => Verdict::Casualty,
        _ => Verdict::InLos,
    }
}

/// Anything an agent did that the trace log records.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceKind {
    Spawn { node: NodeId },
    Request { entity: Entity },
    Grant { entity: Entity },
    Cancel { entity: Entity },
    Release { entity: Entity },
    Arrive { node: NodeId },
    Escape { node: NodeId },
    Casualty { node: NodeId },
    Reroute { steps: Vec<NodeId> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Entity {
    Node(NodeId),
    Edge(NodeId, NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub t: u32,
    pub agent: u32,
    #[serde(flatten)]
    pub kind: TraceKind,
}

/// What happened during one recorded second.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SecondRecord {
    /// Evacuees standing at each node (index = node id - 1).
    pub occupancy: Vec<u32>,
    pub new_casualties: u32,
    pub new_escapes: u32,
    /// Evacuees seen by the shooter from beyond lethal range.
    pub in_los: u32,
    /// Nodes or directed edges holding more occupants than allowed.
    pub violations: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub initial: u32,
    pub casualties: u32,
    pub escapes: u32,
    pub remaining: u32,
    pub los_seconds_total: u64,
    /// `occupancy_series[t][node index]` for t in `0..=horizon`.
    pub occupancy_series: Vec<Vec<u32>>,
    pub casualty_series: Vec<u32>,
    pub escape_series: Vec<u32>,
    pub remaining_series: Vec<u32>,
    pub capacity_violations: u32,
    pub planner_calls: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_traces: Option<Vec<TraceEvent>>,
}

impl SimResult {
    /// Cumulative counts add up to the initial population at every second.
    pub fn is_conserved(&self) -> bool {
        self.casualty_series
            .iter()
            .zip(&self.escape_series)
            .zip(&self.remaining_series)
            .all(|((c, e), r)| c + e + r == self.initial)
    }

    /// Occupancy table: one row per second, one column per node.
    pub fn occupancy_csv(&self) -> String {
        let nodes = self.occupancy_series.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=nodes {
            out.push_str(&format!(",{i}"));
        }
        out.push('\n');
        for (t, row) in self.occupancy_series.iter().enumerate() {
            out.push_str(&t.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Newline-delimited JSON, one event per line.
    pub fn trace_ndjson(&self) -> String {
        let mut out = String::new();
        for e in self.agent_traces.iter().flatten() {
            out.push_str(&serde_json::to_string(e).expect("trace serializes"));
            out.push('\n');
        }
        out
    }
}

/// Folds per-second records into a result. Seconds after the last record
/// repeat its state, so an early stop still yields full-length series.
pub fn collect_metrics(initial: u32, horizon_s: u32, records: &[SecondRecord]) -> SimResult {
    let rows = horizon_s as usize + 1;
    let nodes = records.first().map_or(0, |r| r.occupancy.len());
    let mut result = SimResult {
        initial,
        casualties: 0,
        escapes: 0,
        remaining: initial,
        los_seconds_total: 0,
        occupancy_series: Vec::with_capacity(rows),
        casualty_series: Vec::with_capacity(rows),
        escape_series: Vec::with_capacity(rows),
        remaining_series: Vec::with_capacity(rows),
        capacity_violations: 0,
        planner_calls: 0,
        agent_traces: None,
    };
    let mut last_occupancy = vec![0; nodes];
    for t in 0..rows {
        if let Some(r) = records.get(t) {
            result.casualties += r.new_casualties;
            result.escapes += r.new_escapes;
            result.los_seconds_total += u64::from(r.in_los);
            result.capacity_violations += r.violations;
            last_occupancy.clone_from(&r.occupancy);
        }
        result.remaining = initial - result.casualties - result.escapes;
        result.occupancy_series.push(last_occupancy.clone());
        result.casualty_series.push(result.casualties);
        result.escape_series.push(result.escapes);
        result.remaining_series.push(result.remaining);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_bundled;

    #[test]
    fn adjudication_rules() {
        let g = load_bundled("acyclic_school").unwrap();
        let at = |n| Position::Node(NodeId(n));
        assert_eq!(adjudicate(&g, at(3), at(3), 0), Verdict::Casualty);
        // the spine is one sight line; hall 1 is five hops from hall 6
        assert_eq!(g.hop_distance(NodeId(1), NodeId(6)), Some(5));
        assert_eq!(adjudicate(&g, at(1), at(6), 0), Verdict::InLos);
        // a room next to the shooter's hall is out of sight
        assert_eq!(adjudicate(&g, at(19), at(1), 0), Verdict::Safe);
    }

    #[test]
    fn shared_edge_is_fatal() {
        let g = load_bundled("acyclic_school").unwrap();
        let nb = g.neighbor(NodeId(19), NodeId(1)).unwrap();
        let evac = Position::Edge {
            from: NodeId(19),
            to: NodeId(1),
            edge: nb.edge,
            entered: 4,
            sojourn: nb.sojourn_s,
        };
        let shooter = Position::Edge {
            from: NodeId(1),
            to: NodeId(19),
            edge: nb.edge,
            entered: 3,
            sojourn: nb.sojourn_s,
        };
        assert_eq!(adjudicate(&g, evac, shooter, 4), Verdict::Casualty);
    }

    #[test]
    fn los_seconds_are_counted_directly() {
        let mut records = vec![
            SecondRecord {
                occupancy: vec![1],
                ..Default::default()
            };
            20
        ];
        for r in &mut records[10..=14] {
            r.in_los = 1;
        }
        let res = collect_metrics(1, 30, &records);
        assert_eq!(res.los_seconds_total, 5);
        assert_eq!(res.occupancy_series.len(), 31);
        assert!(res.is_conserved());
    }

    #[test]
    fn no_events_means_no_los() {
        let res = collect_metrics(0, 300, &[]);
        assert_eq!(res.los_seconds_total, 0);
        assert_eq!(res.remaining_series.len(), 301);
    }
}
