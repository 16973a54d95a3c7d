//! Per-action rewards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BuildingGraph, NodeId, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub reward_max: f64,
    pub penalty_max: f64,
    /// Magnitude of the interim +1/-1 rewards. Only changed when scaling the
    /// whole reward structure.
    #[serde(default = "one")]
    pub step_reward: f64,
}

fn one() -> f64 {
    1.0
}

impl RewardParams {
    /// Symmetric parameters: the death penalty mirrors the exit reward.
    pub fn new(reward_max: f64) -> Self {
        RewardParams {
            reward_max,
            penalty_max: -reward_max,
            step_reward: 1.0,
        }
    }

    /// Every magnitude multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        RewardParams {
            reward_max: self.reward_max * factor,
            penalty_max: self.penalty_max * factor,
            step_reward: self.step_reward * factor,
        }
    }
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams::new(10.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Normal,
    Death,
    Exit,
}

/// Which rule of the reward chain produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewardBranch {
    Death,
    Exit,
    NoLessSafe,
    CloserToExit,
    Penalized,
}

pub fn reward_branch(
    g: &BuildingGraph,
    from: NodeId,
    to: NodeId,
    outcome: Outcome,
) -> Result<RewardBranch> {
    g.check(from)?;
    g.check(to)?;
    if from != to && g.neighbor(from, to).is_none() {
        return Err(Error::NotAdjacent { from, to });
    }
    Ok(branch_unchecked(g, from, to, outcome))
}

pub(crate) fn branch_unchecked(
    g: &BuildingGraph,
    from: NodeId,
    to: NodeId,
    outcome: Outcome,
) -> RewardBranch {
    if outcome == Outcome::Death {
        RewardBranch::Death
    } else if outcome == Outcome::Exit || g.kind(to) == NodeKind::Exit {
        RewardBranch::Exit
    } else if g.hardness(to) >= g.hardness(from) {
        RewardBranch::NoLessSafe
    } else if g.exit_time(to) < g.exit_time(from) {
        RewardBranch::CloserToExit
    } else {
        RewardBranch::Penalized
    }
}

pub(crate) fn branch_value(branch: RewardBranch, params: &RewardParams) -> f64 {
    match branch {
        RewardBranch::Death => params.penalty_max,
        RewardBranch::Exit => params.reward_max,
        RewardBranch::NoLessSafe | RewardBranch::CloserToExit => params.step_reward,
        RewardBranch::Penalized => -params.step_reward,
    }
}

/// Reward for staying (`to == from`) or moving to an adjacent node.
pub fn reward(
    g: &BuildingGraph,
    from: NodeId,
    to: NodeId,
    outcome: Outcome,
    params: &RewardParams,
) -> Result<f64> {
    Ok(branch_value(reward_branch(g, from, to, outcome)?, params))
}
