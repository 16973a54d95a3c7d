use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse environment: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("edge {a}-{b} references unknown node {missing}")]
    DanglingEndpoint { a: u32, b: u32, missing: u32 },

    #[error("environment has no exit node")]
    NoExit,

    #[error("node {0} has no path to any exit")]
    Disconnected(NodeId),

    #[error("environment is invalid: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("unknown bundled environment `{0}`")]
    UnknownEnvironment(String),

    #[error("no path from {from} to {to}")]
    Unreachable { from: NodeId, to: NodeId },

    #[error("nodes {from} and {to} are not adjacent")]
    NotAdjacent { from: NodeId, to: NodeId },

    #[error("horizon must be at least one second")]
    ZeroHorizon,

    #[error(
        "transition from {from} departing at t={depart_t} runs past the {horizon_s} s horizon"
    )]
    HorizonOverflow {
        from: NodeId,
        depart_t: u32,
        horizon_s: u32,
    },

    #[error("no feasible action from node {node} at t={t}")]
    NoFeasibleAction { node: NodeId, t: u32 },

    #[error("route from node {0} cannot carry a single evacuee against the current ledger")]
    InfeasibleRoute(NodeId),

    #[error("reservation of {requested} exceeds route capacity {available}")]
    OverReservation { requested: u32, available: u32 },

    #[error("invalid route: {0}")]
    InvalidRoute(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("planner failed at t={t}: {source}")]
    Simulation {
        t: u32,
        #[source]
        source: Box<Error>,
        partial: Box<crate::sim::SimResult>,
    },
}
