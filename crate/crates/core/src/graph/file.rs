//! JSON environment files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{
    compute_exit_times, BuildingGraph, DoorKind, EdgeSpec, GraphParts, NodeId, NodeKind, NodeSpec,
    Wall, WALKING_SPEED_M_S,
};
use crate::error::{Error, Result};

const BUNDLED: &[(&str, &str)] = &[
    (
        "acyclic_school",
        include_str!("../../environments/acyclic_school.json"),
    ),
    (
        "cyclic_school",
        include_str!("../../environments/cyclic_school.json"),
    ),
    (
        "toy_graph",
        include_str!("../../environments/toy_graph.json"),
    ),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    #[allow(dead_code)]
    note: Option<String>,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    los: Option<BTreeMap<u32, Vec<u32>>>,
    #[serde(default)]
    walls: Vec<Wall>,
    #[serde(default)]
    exit_time: Option<BTreeMap<u32, u32>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: u32,
    kind: NodeKind,
    hardness: Option<u32>,
    max_occupancy: Option<u32>,
    position: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    a: u32,
    b: u32,
    sojourn_s: Option<u32>,
    capacity: Option<u32>,
    #[serde(default)]
    door_kind: DoorKind,
}

/// Names accepted by [`load_bundled`].
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

/// Loads one of the environments compiled into the crate.
pub fn load_bundled(name: &str) -> Result<BuildingGraph> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownEnvironment(name.to_string()))?;
    load_environment(text)
}

pub fn load_environment_file(path: &Path) -> Result<BuildingGraph> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_environment(&text)
}

/// Parses and validates an environment document. LOS and exit times are
/// computed when the document omits them.
pub fn load_environment(document: &str) -> Result<BuildingGraph> {
    let file: EnvFile = serde_json::from_str(document)?;

    let nodes: Vec<NodeSpec> = file
        .nodes
        .iter()
        .map(|r| NodeSpec {
            id: NodeId(r.id),
            kind: r.kind,
            hardness: r.hardness.unwrap_or_else(|| r.kind.default_hardness()),
            max_occupancy: r.max_occupancy.unwrap_or_else(|| r.kind.default_capacity()),
            position: r.position,
        })
        .collect();
    let position = |id: u32| nodes.iter().find(|n| n.id.0 == id).and_then(|n| n.position);

    let mut edges = Vec::with_capacity(file.edges.len());
    for r in &file.edges {
        for end in [r.a, r.b] {
            if !nodes.iter().any(|n| n.id.0 == end) {
                return Err(Error::DanglingEndpoint {
                    a: r.a,
                    b: r.b,
                    missing: end,
                });
            }
        }
        let sojourn_s = match r.sojourn_s {
            Some(s) => s,
            None => match (position(r.a), position(r.b)) {
                (Some(p), Some(q)) => {
                    let dist = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                    ((dist / WALKING_SPEED_M_S).ceil() as u32).max(1)
                }
                _ => {
                    return Err(Error::Invalid(vec![format!(
                        "edge {}-{} has no sojourn_s and its endpoints lack positions",
                        r.a, r.b
                    )]))
                }
            },
        };
        let capacity = r.capacity.unwrap_or_else(|| r.door_kind.default_capacity());
        edges.push(EdgeSpec {
            a: NodeId(r.a),
            b: NodeId(r.b),
            sojourn_s,
            capacity,
            door_kind: r.door_kind,
            throughput_per_s: r.door_kind.throughput(capacity),
        });
    }

    let to_ids = |v: &Vec<u32>| v.iter().map(|&x| NodeId(x)).collect::<Vec<_>>();
    let graph = BuildingGraph::assemble(GraphParts {
        name: file.name.unwrap_or_default(),
        nodes,
        edges,
        los: file
            .los
            .map(|m| m.iter().map(|(k, v)| (NodeId(*k), to_ids(v))).collect()),
        walls: file.walls,
        exit_time: file
            .exit_time
            .map(|m| m.into_iter().map(|(k, v)| (NodeId(k), v)).collect()),
    })?;

    // Surfaces the dedicated no-exit / disconnected errors before the
    // general invariant sweep.
    compute_exit_times(&graph)?;
    let violations = graph.validate();
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(Error::Invalid(violations))
    }
}
