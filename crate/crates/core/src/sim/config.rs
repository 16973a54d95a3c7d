//! Scenario configuration.

use serde::{Deserialize, Serialize};

use crate::baselines::NaturalResponseParams;
use crate::error::{Error, Result};
use crate::graph::{BuildingGraph, NodeId, NodeKind};
use crate::planner::PlannerParams;
use crate::threat::DEFAULT_HORIZON_S;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    RoomsOnly,
    RoomsAndHalls,
}

impl Distribution {
    pub fn as_str(self) -> &'static str {
        match self {
            Distribution::RoomsOnly => "rooms_only",
            Distribution::RoomsAndHalls => "rooms_and_halls",
        }
    }

    /// Nodes that start populated, ascending by id.
    pub fn start_nodes(self, g: &BuildingGraph) -> Vec<NodeId> {
        g.node_ids()
            .filter(|&n| match g.kind(n) {
                NodeKind::Room => true,
                NodeKind::Hall => self == Distribution::RoomsAndHalls,
                NodeKind::Exit => false,
            })
            .collect()
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rooms_only" => Ok(Distribution::RoomsOnly),
            "rooms_and_halls" => Ok(Distribution::RoomsAndHalls),
            other => Err(Error::Config(format!("unknown distribution `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Ccasters,
    NaiveAsters,
    NaturalResponse,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [
        PlannerKind::Ccasters,
        PlannerKind::NaiveAsters,
        PlannerKind::NaturalResponse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Ccasters => "ccasters",
            PlannerKind::NaiveAsters => "naive_asters",
            PlannerKind::NaturalResponse => "natural_response",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown planner `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanPolicy {
    #[default]
    OnShooterNodeChange,
    EveryKSeconds(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Bundled environment name or path to an environment file.
    pub environment: String,
    pub evacuee_distribution: Distribution,
    #[serde(default = "default_per_node")]
    pub evacuees_per_node: u32,
    pub shooter_spawn: NodeId,
    pub planner: PlannerKind,
    #[serde(default = "default_reward")]
    pub reward_max: f64,
    pub seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon_s: u32,
    #[serde(default)]
    pub replan_policy: ReplanPolicy,
    #[serde(default = "default_lookahead")]
    pub lookahead_s: u32,
    #[serde(default = "default_route_max")]
    pub route_max: u32,
    #[serde(default)]
    pub natural_response: NaturalResponseParams,
    #[serde(default)]
    pub record_traces: bool,
}

fn default_per_node() -> u32 {
    10
}
fn default_reward() -> f64 {
    10.0
}
fn default_horizon() -> u32 {
    DEFAULT_HORIZON_S
}
fn default_lookahead() -> u32 {
    60
}
fn default_route_max() -> u32 {
    5
}

impl ScenarioConfig {
    pub fn new(
        environment: &str,
        evacuee_distribution: Distribution,
        shooter_spawn: NodeId,
        planner: PlannerKind,
        seed: u64,
    ) -> Self {
        ScenarioConfig {
            environment: environment.to_string(),
            evacuee_distribution,
            evacuees_per_node: default_per_node(),
            shooter_spawn,
            planner,
            reward_max: default_reward(),
            seed,
            horizon_s: default_horizon(),
            replan_policy: ReplanPolicy::default(),
            lookahead_s: default_lookahead(),
            route_max: default_route_max(),
            natural_response: NaturalResponseParams::default(),
            record_traces: false,
        }
    }

    pub fn planner_params(&self) -> PlannerParams {
        let mut p = PlannerParams::with_reward_max(self.reward_max);
        p.lookahead_s = self.lookahead_s;
        p.route_max = self.route_max;
        p
    }

    pub fn validate(&self, g: &BuildingGraph) -> Result<()> {
        g.check(self.shooter_spawn)?;
        if self.horizon_s == 0 {
            return Err(Error::ZeroHorizon);
        }
        if self.lookahead_s == 0 {
            return Err(Error::Config("lookahead_s must be positive".into()));
        }
        if self.route_max == 0 {
            return Err(Error::Config("route_max must be positive".into()));
        }
        if self.natural_response.d_threshold == 0 {
            return Err(Error::Config("d_threshold must be positive".into()));
        }
        if !(self.reward_max.is_finite() && self.reward_max > 0.0) {
            return Err(Error::Config("reward_max must be a positive number".into()));
        }
        if let ReplanPolicy::EveryKSeconds(0) = self.replan_policy {
            return Err(Error::Config("replan interval must be positive".into()));
        }
        for n in self.evacuee_distribution.start_nodes(g) {
            let cap = g.node(n)?.max_occupancy;
            if self.evacuees_per_node > cap {
                return Err(Error::Config(format!(
                    "{} evacuees do not fit in node {n} (capacity {cap})",
                    self.evacuees_per_node
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_with_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{"environment": "acyclic_school", "evacuee_distribution": "rooms_only",
                "shooter_spawn": 38, "planner": "ccasters", "seed": 3,
                "replan_policy": {"every_k_seconds": 5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.evacuees_per_node, 10);
        assert_eq!(cfg.horizon_s, 300);
        assert_eq!(cfg.replan_policy, ReplanPolicy::EveryKSeconds(5));
        let back: ScenarioConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
