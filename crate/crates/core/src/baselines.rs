//! Comparison planners: the uncapacitated single-route optimum and a
//! rule-based run-or-hide heuristic.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{BuildingGraph, NodeId, NodeKind};
use crate::planner::{CapacityLedger, Policy, RewardParams, Route, UNCAPACITATED};
use crate::threat::HarmField;

/// Value iteration with every capacity lifted, over the harm field's full
/// horizon. One solve serves every start node.
pub fn naive_policy(g: &BuildingGraph, h: &HarmField, params: &RewardParams) -> Result<Policy> {
    let ledger = CapacityLedger::uniform(g, h.horizon_s(), UNCAPACITATED);
    Policy::solve(g, h, &ledger, params)
}

/// The route every evacuee at `start` receives, regardless of how many
/// share the node.
pub fn plan_naive_asters(
    g: &BuildingGraph,
    h: &HarmField,
    start: NodeId,
    t0: u32,
    params: &RewardParams,
) -> Result<Route> {
    g.check(start)?;
    naive_policy(g, h, params)?.route(start, t0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaturalResponseParams {
    /// Hop distance from the shooter at or beyond which evacuees run.
    pub d_threshold: u32,
}

impl Default for NaturalResponseParams {
    fn default() -> Self {
        NaturalResponseParams { d_threshold: 7 }
    }
}

/// Run to an exit when the shooter is far, otherwise hide: stay put in a
/// room, or step from a hall into the nearest adjacent room.
///
/// A runner prefers exits whose path does not step closer to the shooter.
/// From a dead end every path does, so the runner then takes the nearest
/// exit that is at least as far from the shooter as the runner is.
pub fn plan_natural_response(
    g: &BuildingGraph,
    evac_node: NodeId,
    shooter_node: NodeId,
    params: &NaturalResponseParams,
) -> Result<Route> {
    g.check(evac_node)?;
    g.check(shooter_node)?;
    if g.is_exit(evac_node) {
        return Ok(Route::new(vec![evac_node], 0));
    }
    let d = g.hop_distance(evac_node, shooter_node).unwrap_or(u32::MAX);
    if d >= params.d_threshold {
        if let Some(route) = run_route(g, evac_node, shooter_node, d) {
            return Ok(route);
        }
    }
    Ok(hide_route(g, evac_node))
}

fn run_route(g: &BuildingGraph, from: NodeId, shooter: NodeId, d: u32) -> Option<Route> {
    // (length, -first-step distance, exit id) picks the nearest exit, then
    // the one leading furthest from the shooter, then the lowest id
    let mut away: Option<((u32, i64, NodeId), Vec<NodeId>)> = None;
    let mut fallback: Option<((u32, i64, NodeId), Vec<NodeId>)> = None;
    for exit in g.exits() {
        let Ok((path, len)) = g.shortest_path(from, exit) else {
            continue;
        };
        let first = g.hop_distance(path[1], shooter).unwrap_or(u32::MAX);
        let key = (len, -i64::from(first), exit);
        let slot = if first >= d {
            &mut away
        } else if g.hop_distance(exit, shooter).unwrap_or(u32::MAX) >= d {
            &mut fallback
        } else {
            continue;
        };
        if slot.as_ref().is_none_or(|(k, _)| key < *k) {
            *slot = Some((key, path));
        }
    }
    away.or(fallback).map(|(_, path)| Route::new(path, 0))
}

fn hide_route(g: &BuildingGraph, at: NodeId) -> Route {
    if g.kind(at) == NodeKind::Room {
        return Route::new(vec![at], 0);
    }
    let room = g
        .neighbors(at)
        .iter()
        .filter(|nb| g.kind(nb.node) == NodeKind::Room)
        .min_by_key(|nb| (nb.sojourn_s, nb.node));
    match room {
        Some(nb) => Route::new(vec![at, nb.node], 0),
        None => Route::new(vec![at], 0),
    }
}
