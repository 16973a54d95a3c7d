//! The capacity-constrained planner.
//!
//! Nodes are served in rounds. In each round every node that still has
//! unassigned evacuees gets the current best route, as many evacuees as the
//! route's bottleneck allows are assigned to it, and that capacity is
//! reserved in a shared time-expanded ledger. Later rounds therefore see
//! blocked doorways and tend to produce routes that wait before leaving.

mod ledger;
mod reward;
mod vi;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BuildingGraph, NodeId};
use crate::threat::{harm_field, HarmField, DEFAULT_HORIZON_S};

pub use ledger::{CapacityLedger, UNCAPACITATED};
pub use reward::{reward, reward_branch, Outcome, RewardBranch, RewardParams};
pub use vi::{value_iteration, Policy};

/// A node sequence; repeated ids are one-second waits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub steps: Vec<NodeId>,
    pub depart_t: u32,
    pub maxsend: u32,
}

impl Route {
    pub fn new(steps: Vec<NodeId>, depart_t: u32) -> Self {
        Route {
            steps,
            depart_t,
            maxsend: 0,
        }
    }

    pub fn start(&self) -> NodeId {
        self.steps[0]
    }

    pub fn last(&self) -> NodeId {
        *self.steps.last().expect("non-empty route")
    }

    /// Second at which the first move begins, after any leading waits.
    pub fn departure_time(&self) -> u32 {
        let waits = self
            .steps
            .iter()
            .take_while(|&&s| s == self.steps[0])
            .count()
            - 1;
        self.depart_t + waits as u32
    }

    pub fn ends_at_exit(&self, g: &BuildingGraph) -> bool {
        g.is_exit(self.last())
    }

    /// Checks that consecutive distinct steps are adjacent.
    pub fn validate(&self, g: &BuildingGraph) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::InvalidRoute("route has no steps".into()));
        }
        for s in &self.steps {
            g.check(*s)?;
        }
        for w in self.steps.windows(2) {
            if w[0] != w[1] && g.neighbor(w[0], w[1]).is_none() {
                return Err(Error::InvalidRoute(format!(
                    "steps {} and {} are not adjacent",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub route: Route,
    pub assigned: u32,
    /// Set for fallback routes issued once the round cap is hit; these hold
    /// no ledger reservation.
    #[serde(default)]
    pub shelter: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvacuationPlan {
    pub assignments: BTreeMap<NodeId, Vec<Assignment>>,
    pub round_count: u32,
    /// Some evacuees could not be routed within the round cap.
    pub incomplete: bool,
}

impl EvacuationPlan {
    pub fn total_assigned(&self) -> u32 {
        self.assignments
            .values()
            .flat_map(|v| v.iter().map(|a| a.assigned))
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub reward: RewardParams,
    /// Seconds of lookahead per planning call.
    pub lookahead_s: u32,
    /// Round cap.
    pub route_max: u32,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            reward: RewardParams::default(),
            lookahead_s: 60,
            route_max: 5,
        }
    }
}

impl PlannerParams {
    pub fn with_reward_max(reward_max: f64) -> Self {
        PlannerParams {
            reward: RewardParams::new(reward_max),
            ..Default::default()
        }
    }

    pub(crate) fn horizon(&self) -> Result<u32> {
        let h = self.lookahead_s.min(DEFAULT_HORIZON_S);
        if h == 0 {
            Err(Error::ZeroHorizon)
        } else {
            Ok(h)
        }
    }
}

/// Non-exit nodes by time to the nearest exit, then travel time to the
/// shooter, then id.
pub fn order_nodes(g: &BuildingGraph, node_s: NodeId) -> Result<Vec<NodeId>> {
    g.check(node_s)?;
    let mut nodes: Vec<NodeId> = g.node_ids().filter(|&n| !g.is_exit(n)).collect();
    nodes.sort_by_key(|&n| {
        (
            g.exit_time(n),
            g.travel_time(n, node_s).unwrap_or(u32::MAX),
            n,
        )
    });
    Ok(nodes)
}

/// Builds the harm field from the shooter's last known node and plans every
/// evacuee against a fresh ledger.
pub fn plan_ccasters(
    g: &BuildingGraph,
    occupancy: &BTreeMap<NodeId, u32>,
    node_s: NodeId,
    params: &PlannerParams,
) -> Result<EvacuationPlan> {
    g.check(node_s)?;
    let horizon = params.horizon()?;
    let h = harm_field(g, node_s, horizon)?;
    let mut ledger = CapacityLedger::new(g, horizon);
    plan_with(g, occupancy, node_s, &h, &mut ledger, params)
}

/// The planning loop against a caller-supplied harm field and ledger. The
/// ledger is left holding every reservation made.
pub fn plan_with(
    g: &BuildingGraph,
    occupancy: &BTreeMap<NodeId, u32>,
    node_s: NodeId,
    h: &HarmField,
    ledger: &mut CapacityLedger,
    params: &PlannerParams,
) -> Result<EvacuationPlan> {
    let mut plan = EvacuationPlan::default();
    let mut remaining = vec![0u32; g.node_count()];
    for (&n, &count) in occupancy {
        g.check(n)?;
        if count == 0 {
            continue;
        }
        if g.is_exit(n) {
            // already out; recorded so the counts add up
            let mut route = Route::new(vec![n], 0);
            route.maxsend = count;
            plan.assignments.entry(n).or_default().push(Assignment {
                route,
                assigned: count,
                shelter: false,
            });
        } else {
            remaining[n.index()] = count;
        }
    }
    if remaining.iter().all(|&c| c == 0) {
        return Ok(plan);
    }

    let order: Vec<NodeId> = order_nodes(g, node_s)?
        .into_iter()
        .filter(|n| remaining[n.index()] > 0)
        .collect();
    let mut policy = Policy::solve(g, h, ledger, &params.reward)?;

    for round in 1..=params.route_max {
        plan.round_count = round;
        for &n in &order {
            let left = remaining[n.index()];
            if left == 0 || policy.is_blocked(n, 0) {
                continue;
            }
            let mut route = policy.route(n, 0)?;
            let maxsend = match ledger.compute_maxsend(g, &route) {
                Ok(m) => m,
                // the start cell itself is full; try again next round
                Err(Error::InfeasibleRoute(_)) => continue,
                Err(e) => return Err(e),
            };
            let k = maxsend.min(left);
            route.maxsend = maxsend;
            if let Some(t) = ledger.reserve_tracked(g, &route, k)? {
                if t > 0 {
                    policy.refresh(ledger, t - 1);
                }
            }
            remaining[n.index()] -= k;
            plan.assignments.entry(n).or_default().push(Assignment {
                route,
                assigned: k,
                shelter: false,
            });
        }
        if remaining.iter().all(|&c| c == 0) {
            break;
        }
    }

    for &n in &order {
        let left = remaining[n.index()];
        if left > 0 {
            plan.incomplete = true;
            plan.assignments.entry(n).or_default().push(Assignment {
                route: Route::new(vec![n], 0),
                assigned: left,
                shelter: true,
            });
        }
    }
    Ok(plan)
}

/// Re-applies every non-shelter assignment to a fresh ledger; fails if any
/// cell would go negative.
pub fn replay_plan(
    g: &BuildingGraph,
    plan: &EvacuationPlan,
    horizon_s: u32,
) -> Result<CapacityLedger> {
    let mut ledger = CapacityLedger::new(g, horizon_s);
    for list in plan.assignments.values() {
        for a in list
            .iter()
            .filter(|a| !a.shelter && !g.is_exit(a.route.start()))
        {
            ledger.reserve_capacity(g, &a.route, a.assigned)?;
        }
    }
    Ok(ledger)
}
