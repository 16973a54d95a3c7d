//! Finite-horizon value iteration over (node, second).
//!
//! Exits are absorbing and pay `reward_max` for every remaining second, so
//! reaching one earlier is always worth more than waiting. Any other state
//! chooses between staying one second and taking an incident edge; an action
//! ends in death with its transition harm probability.

use crate::error::{Error, Result};
use crate::graph::{BuildingGraph, NodeId};
use crate::threat::{transition_unchecked, HarmField};

use super::ledger::CapacityLedger;
use super::reward::{branch_unchecked, branch_value, Outcome, RewardParams};
use super::Route;

const STAY: u32 = 0;
const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Slot {
    to: NodeId,
    edge_col: usize,
    sojourn: u32,
    held: u32,
    reward: f64,
}

/// The value function and greedy policy for one harm field and ledger.
#[derive(Clone, Debug)]
pub struct Policy {
    horizon_s: u32,
    nodes: usize,
    offsets: Vec<usize>,
    slots: Vec<Slot>,
    stay_reward: Vec<f64>,
    is_exit: Vec<bool>,
    p_stay: Vec<f64>,
    p_move: Vec<f64>,
    value: Vec<f64>,
    choice: Vec<u32>,
    penalty: f64,
}

#[inline]
fn combine(p: f64, penalty: f64, r: f64, next: f64) -> f64 {
    if p >= 1.0 {
        penalty
    } else if next == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        p * penalty + (1.0 - p) * (r + next)
    }
}

impl Policy {
    /// Runs backward induction from the ledger's horizon.
    pub fn solve(
        g: &BuildingGraph,
        h: &HarmField,
        ledger: &CapacityLedger,
        params: &RewardParams,
    ) -> Result<Self> {
        let horizon = ledger.horizon_s();
        if horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        if h.horizon_s() < horizon {
            return Err(Error::Config(format!(
                "harm field covers {} s but the ledger covers {} s",
                h.horizon_s(),
                horizon
            )));
        }
        let n = g.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut slots = Vec::new();
        offsets.push(0);
        for from in g.node_ids() {
            for nb in g.neighbors(from) {
                let dir = g.dir_edge(from, nb.node).expect("adjacent");
                let held = if g.edge(nb.edge).door_kind.is_door() {
                    1
                } else {
                    nb.sojourn_s
                };
                slots.push(Slot {
                    to: nb.node,
                    edge_col: ledger.edge_col(dir),
                    sojourn: nb.sojourn_s,
                    held,
                    reward: branch_value(
                        branch_unchecked(g, from, nb.node, Outcome::Normal),
                        params,
                    ),
                });
            }
            offsets.push(slots.len());
        }
        let stay_reward = g
            .node_ids()
            .map(|x| branch_value(branch_unchecked(g, x, x, Outcome::Normal), params))
            .collect();
        let is_exit = g.node_ids().map(|x| g.is_exit(x)).collect();

        let rows = horizon as usize;
        let mut p_stay = vec![0.0; rows * n];
        let mut p_move = vec![1.0; rows * slots.len()];
        for t in 0..horizon {
            for from in g.node_ids() {
                let i = from.index();
                p_stay[t as usize * n + i] = transition_unchecked(h, from, from, t, 0);
                for (k, slot) in slots[offsets[i]..offsets[i + 1]].iter().enumerate() {
                    if t + slot.sojourn < horizon {
                        p_move[t as usize * slots.len() + offsets[i] + k] =
                            transition_unchecked(h, from, slot.to, t, slot.sojourn);
                    }
                }
            }
        }

        let mut policy = Policy {
            horizon_s: horizon,
            nodes: n,
            offsets,
            slots,
            stay_reward,
            is_exit,
            p_stay,
            p_move,
            value: vec![0.0; (rows + 1) * n],
            choice: vec![NONE; rows * n],
            penalty: params.penalty_max,
        };
        for i in 0..n {
            if policy.is_exit[i] {
                for t in 0..=horizon {
                    policy.value[t as usize * n + i] = params.reward_max * f64::from(horizon - t);
                }
                for t in 0..rows {
                    policy.choice[t * n + i] = STAY;
                }
            }
        }
        policy.refresh(ledger, horizon - 1);
        Ok(policy)
    }

    /// Recomputes every decision layer at or before `t_max`. Layers after it
    /// must still be consistent with the ledger.
    pub(crate) fn refresh(&mut self, ledger: &CapacityLedger, t_max: u32) {
        let n = self.nodes;
        let horizon = self.horizon_s;
        let nslots = self.slots.len();
        let top = t_max.min(horizon - 1);
        for t in (0..=top).rev() {
            let tu = t as usize;
            for i in 0..n {
                if self.is_exit[i] {
                    continue;
                }
                let mut best = f64::NEG_INFINITY;
                let mut choice = NONE;
                if ledger.get(t + 1, i) > 0 {
                    best = combine(
                        self.p_stay[tu * n + i],
                        self.penalty,
                        self.stay_reward[i],
                        self.value[(tu + 1) * n + i],
                    );
                    choice = STAY;
                }
                for k in self.offsets[i]..self.offsets[i + 1] {
                    let slot = &self.slots[k];
                    let arrive = t + slot.sojourn + 1;
                    if arrive > horizon || ledger.get(arrive, slot.to.index()) == 0 {
                        continue;
                    }
                    if (1..=slot.held).any(|s| ledger.get(t + s, slot.edge_col) == 0) {
                        continue;
                    }
                    let q = combine(
                        self.p_move[tu * nslots + k],
                        self.penalty,
                        slot.reward,
                        self.value[arrive as usize * n + slot.to.index()],
                    );
                    if q > best || choice == NONE {
                        best = q;
                        choice = (k - self.offsets[i] + 1) as u32;
                    }
                }
                self.value[tu * n + i] = best;
                self.choice[tu * n + i] = choice;
            }
        }
    }

    pub fn horizon_s(&self) -> u32 {
        self.horizon_s
    }

    /// Expected return from being at `n` at second `t`; negative infinity
    /// when no feasible action exists.
    pub fn value(&self, n: NodeId, t: u32) -> f64 {
        self.value[t as usize * self.nodes + n.index()]
    }

    /// Greedy action at (n, t): `Some(n)` for a stay, `Some(m)` for a move,
    /// `None` when nothing is feasible or the horizon is reached.
    pub fn action(&self, n: NodeId, t: u32) -> Option<NodeId> {
        if t >= self.horizon_s {
            return None;
        }
        match self.choice[t as usize * self.nodes + n.index()] {
            NONE => None,
            STAY => Some(n),
            k => Some(self.slots[self.offsets[n.index()] + k as usize - 1].to),
        }
    }

    pub(crate) fn is_blocked(&self, n: NodeId, t: u32) -> bool {
        t < self.horizon_s && self.choice[t as usize * self.nodes + n.index()] == NONE
    }

    /// Unrolls the greedy policy from (start, t0) until an exit, the horizon,
    /// or a state without feasible actions.
    pub fn route(&self, start: NodeId, t0: u32) -> Result<Route> {
        if start.0 == 0 || start.index() >= self.nodes {
            return Err(Error::UnknownNode(start));
        }
        if t0 >= self.horizon_s {
            return Err(Error::HorizonOverflow {
                from: start,
                depart_t: t0,
                horizon_s: self.horizon_s,
            });
        }
        if self.is_blocked(start, t0) {
            return Err(Error::NoFeasibleAction { node: start, t: t0 });
        }
        let mut steps = vec![start];
        let mut n = start;
        let mut t = t0;
        while t < self.horizon_s && !self.is_exit[n.index()] {
            let code = self.choice[t as usize * self.nodes + n.index()];
            match code {
                NONE => break,
                STAY => t += 1,
                k => {
                    let slot = &self.slots[self.offsets[n.index()] + k as usize - 1];
                    n = slot.to;
                    t += slot.sojourn + 1;
                }
            }
            steps.push(n);
        }
        Ok(Route::new(steps, t0))
    }
}

/// Best route from `start` departing at `t0` against the given ledger.
pub fn value_iteration(
    g: &BuildingGraph,
    h: &HarmField,
    ledger: &CapacityLedger,
    start: NodeId,
    t0: u32,
    params: &RewardParams,
) -> Result<Route> {
    g.check(start)?;
    Policy::solve(g, h, ledger, params)?.route(start, t0)
}
