//! Scenario matrices, aggregation and CSV output.
//!
//! Cells are enumerated as environments × planners × distributions × spawns
//! × seeds, in that nesting order, and every output is written in that order
//! no matter how many workers ran the cells.

mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{load_bundled, load_environment_file, BuildingGraph, NodeId, NodeKind};
use crate::sim::{
    run_simulation_on, Distribution, PlannerKind, ReplanPolicy, ScenarioConfig, SimResult,
};

pub use output::{
    aggregate, crowding_csv, read_runs_csv, summarize, summary_csv, sweep_csv,
    write_aggregates_csv, write_runs_csv, AggregateRow, RunRow, SummaryRow,
};

/// Seconds covered by crowding series.
pub const CROWDING_WINDOW_S: u32 = 75;

pub const DEFAULT_REWARD_SWEEP: [f64; 7] = [6.0, 8.0, 9.0, 10.0, 11.0, 12.0, 14.0];

/// Shooter spawn lists of the bundled schools.
pub fn default_spawns(env: &str) -> Option<Vec<NodeId>> {
    let ids: &[u32] = match env {
        "acyclic_school" => &[2, 6, 11, 20, 38, 51, 52, 54, 55],
        "cyclic_school" => &[2, 16, 29, 30, 37, 44, 59, 70],
        _ => return None,
    };
    Some(ids.iter().map(|&i| NodeId(i)).collect())
}

/// Evacuees placed per start node: four in the cyclic school, ten elsewhere.
pub fn default_evacuees_per_node(env: &str) -> u32 {
    match env {
        "cyclic_school" => 4,
        _ => 10,
    }
}

/// Exit-adjacent nodes watched for crowding in the bundled schools.
pub fn default_crowding_nodes(env: &str) -> Option<Vec<NodeId>> {
    let ids: &[u32] = match env {
        "acyclic_school" => &[1, 12, 18],
        "cyclic_school" => &[2, 13, 16, 27],
        _ => return None,
    };
    Some(ids.iter().map(|&i| NodeId(i)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub environments: Vec<String>,
    #[serde(default = "all_planners")]
    pub planners: Vec<PlannerKind>,
    #[serde(default = "all_distributions")]
    pub distributions: Vec<Distribution>,
    /// Per-environment spawn lists; bundled schools default to their lists.
    #[serde(default)]
    pub spawns: BTreeMap<String, Vec<NodeId>>,
    /// Explicit seeds; otherwise `seed_count` consecutive seeds from `base_seed`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_seed_count")]
    pub seed_count: u32,
    #[serde(default = "default_reward")]
    pub reward_max: f64,
    #[serde(default = "default_sweep")]
    pub reward_sweep: Vec<f64>,
    /// Overrides the per-environment default for every environment.
    #[serde(default)]
    pub evacuees_per_node: Option<u32>,
    #[serde(default)]
    pub replan_policy: ReplanPolicy,
    #[serde(default)]
    pub crowding_nodes: BTreeMap<String, Vec<NodeId>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn all_planners() -> Vec<PlannerKind> {
    PlannerKind::ALL.to_vec()
}
fn all_distributions() -> Vec<Distribution> {
    vec![Distribution::RoomsOnly, Distribution::RoomsAndHalls]
}
fn default_base_seed() -> u64 {
    1
}
fn default_seed_count() -> u32 {
    20
}
fn default_reward() -> f64 {
    10.0
}
fn default_sweep() -> Vec<f64> {
    DEFAULT_REWARD_SWEEP.to_vec()
}

impl ExperimentSpec {
    /// The full matrix for the given environments with every default.
    pub fn new(environments: &[&str]) -> Self {
        ExperimentSpec {
            environments: environments.iter().map(|s| s.to_string()).collect(),
            planners: all_planners(),
            distributions: all_distributions(),
            spawns: BTreeMap::new(),
            seeds: None,
            base_seed: default_base_seed(),
            seed_count: default_seed_count(),
            reward_max: default_reward(),
            reward_sweep: default_sweep(),
            evacuees_per_node: None,
            replan_policy: ReplanPolicy::default(),
            crowding_nodes: BTreeMap::new(),
            output_dir: None,
        }
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..u64::from(self.seed_count))
                .map(|i| self.base_seed + i)
                .collect(),
        }
    }

    pub fn spawns_for(&self, env: &str) -> Result<Vec<NodeId>> {
        self.spawns
            .get(env)
            .cloned()
            .or_else(|| default_spawns(env))
            .ok_or_else(|| Error::Config(format!("no spawn list for environment `{env}`")))
    }

    pub fn evacuees_per_node_for(&self, env: &str) -> u32 {
        self.evacuees_per_node
            .unwrap_or_else(|| default_evacuees_per_node(env))
    }

    pub fn crowding_nodes_for(&self, env: &str) -> Vec<NodeId> {
        self.crowding_nodes
            .get(env)
            .cloned()
            .or_else(|| default_crowding_nodes(env))
            .unwrap_or_default()
    }

    fn check(&self) -> Result<()> {
        let empty = |what: &str| Error::Config(format!("experiment has no {what}"));
        if self.environments.is_empty() {
            return Err(empty("environments"));
        }
        if self.planners.is_empty() {
            return Err(empty("planners"));
        }
        if self.distributions.is_empty() {
            return Err(empty("distributions"));
        }
        if self.seed_list().is_empty() {
            return Err(empty("seeds"));
        }
        if self.evacuees_per_node == Some(0) {
            return Err(Error::Config("evacuees_per_node must be positive".into()));
        }
        Ok(())
    }
}

/// Loads a bundled environment by name, or a file by path.
pub fn load_named(env: &str) -> Result<BuildingGraph> {
    match load_bundled(env) {
        Err(Error::UnknownEnvironment(_)) if std::path::Path::new(env).exists() => {
            load_environment_file(std::path::Path::new(env))
        }
        other => other,
    }
}

/// One simulated cell of the matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub environment: String,
    pub planner: PlannerKind,
    pub distribution: Distribution,
    pub spawn: NodeId,
    pub spawn_category: NodeKind,
    pub seed: u64,
    pub reward_max: f64,
}

/// A finished cell; `result` carries the error text on failure.
#[derive(Clone, Debug)]
pub struct CellOutcome {
    pub cell: Cell,
    pub result: std::result::Result<SimResult, String>,
}

impl CellOutcome {
    pub fn row(&self) -> RunRow {
        RunRow::new(&self.cell, self.result.as_ref())
    }
}

#[derive(Debug)]
pub struct ExperimentResults {
    pub outcomes: Vec<CellOutcome>,
}

impl ExperimentResults {
    pub fn rows(&self) -> Vec<RunRow> {
        self.outcomes.iter().map(CellOutcome::row).collect()
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w.max(1));
    }
    b.build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn run_cells(
    graphs: &BTreeMap<String, BuildingGraph>,
    cells: Vec<Cell>,
    spec: &ExperimentSpec,
    workers: Option<usize>,
) -> Result<Vec<CellOutcome>> {
    let pool = build_pool(workers)?;
    let outcomes = pool.install(|| {
        cells
            .into_par_iter()
            .map(|cell| {
                let g = &graphs[&cell.environment];
                let mut cfg = ScenarioConfig::new(
                    &cell.environment,
                    cell.distribution,
                    cell.spawn,
                    cell.planner,
                    cell.seed,
                );
                cfg.reward_max = cell.reward_max;
                cfg.evacuees_per_node = spec.evacuees_per_node_for(&cell.environment);
                cfg.replan_policy = spec.replan_policy;
                let result = run_simulation_on(g, &cfg).map_err(|e| e.to_string());
                CellOutcome { cell, result }
            })
            .collect()
    });
    Ok(outcomes)
}

fn load_all(envs: &[String]) -> Result<BTreeMap<String, BuildingGraph>> {
    envs.iter()
        .map(|e| Ok((e.clone(), load_named(e)?)))
        .collect()
}

/// Every cell of the matrix, in enumeration order.
pub fn enumerate_cells(
    spec: &ExperimentSpec,
    graphs: &BTreeMap<String, BuildingGraph>,
) -> Result<Vec<Cell>> {
    let seeds = spec.seed_list();
    let mut cells = Vec::new();
    for env in &spec.environments {
        let g = &graphs[env];
        let spawns = spec.spawns_for(env)?;
        for s in &spawns {
            g.check(*s)?;
        }
        for &planner in &spec.planners {
            for &distribution in &spec.distributions {
                for &spawn in &spawns {
                    for &seed in &seeds {
                        cells.push(Cell {
                            environment: env.clone(),
                            planner,
                            distribution,
                            spawn,
                            spawn_category: g.kind(spawn),
                            seed,
                            reward_max: spec.reward_max,
                        });
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// Runs the whole matrix. Cell failures are recorded, not fatal.
pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentResults> {
    spec.check()?;
    let graphs = load_all(&spec.environments)?;
    let cells = enumerate_cells(spec, &graphs)?;
    Ok(ExperimentResults {
        outcomes: run_cells(&graphs, cells, spec, workers)?,
    })
}

/// Seed-averaged cumulative casualties over time for each reward value,
/// using the capacity-constrained planner.
#[derive(Clone, Debug)]
pub struct RewardSweep {
    pub environment: String,
    pub distribution: Distribution,
    pub values: Vec<f64>,
    /// `curves[v][t]`: mean cumulative casualties at second t for value v.
    pub curves: Vec<Vec<f64>>,
    pub failures: usize,
}

impl RewardSweep {
    /// Mean casualties at the end of the horizon, per value.
    pub fn final_means(&self) -> Vec<f64> {
        self.curves
            .iter()
            .map(|c| *c.last().unwrap_or(&0.0))
            .collect()
    }
}

pub fn sweep_reward(
    spec: &ExperimentSpec,
    env: &str,
    distribution: Distribution,
    workers: Option<usize>,
) -> Result<RewardSweep> {
    if spec.reward_sweep.is_empty() {
        return Err(Error::Config("reward sweep has no values".into()));
    }
    let graphs = load_all(&[env.to_string()])?;
    let mut sub = spec.clone();
    sub.environments = vec![env.to_string()];
    sub.planners = vec![PlannerKind::Ccasters];
    sub.distributions = vec![distribution];
    sub.check()?;
    let mut cells = Vec::new();
    for &value in &spec.reward_sweep {
        sub.reward_max = value;
        cells.extend(enumerate_cells(&sub, &graphs)?);
    }
    let outcomes = run_cells(&graphs, cells, &sub, workers)?;
    let mut curves = Vec::new();
    let mut failures = 0;
    for &value in &spec.reward_sweep {
        let runs: Vec<&SimResult> = outcomes
            .iter()
            .filter(|o| o.cell.reward_max == value)
            .filter_map(|o| o.result.as_ref().ok())
            .collect();
        failures += outcomes
            .iter()
            .filter(|o| o.cell.reward_max == value && o.result.is_err())
            .count();
        curves.push(mean_series(
            runs.iter().map(|r| r.casualty_series.as_slice()),
        ));
    }
    Ok(RewardSweep {
        environment: env.to_string(),
        distribution,
        values: spec.reward_sweep.clone(),
        curves,
        failures,
    })
}

fn mean_series<'a>(series: impl Iterator<Item = &'a [u32]>) -> Vec<f64> {
    let mut sum: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for s in series {
        if sum.is_empty() {
            sum = vec![0.0; s.len()];
        }
        for (acc, v) in sum.iter_mut().zip(s) {
            *acc += f64::from(*v);
        }
        n += 1;
    }
    if n > 0 {
        for v in &mut sum {
            *v /= n as f64;
        }
    }
    sum
}

/// Seed-averaged occupancy for `t = 0..=75` at the given nodes, per planner.
#[derive(Clone, Debug, PartialEq)]
pub struct CrowdingTable {
    pub environment: String,
    pub planners: Vec<PlannerKind>,
    pub nodes: Vec<NodeId>,
    /// `series[(planner, node)][t]`.
    pub series: BTreeMap<(PlannerKind, NodeId), Vec<f64>>,
}

impl CrowdingTable {
    pub fn peak(&self, planner: PlannerKind, node: NodeId) -> f64 {
        self.series[&(planner, node)]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Averages every successful run of `env` per planner.
pub fn export_crowding(
    results: &ExperimentResults,
    env: &str,
    nodes: &[NodeId],
) -> Result<CrowdingTable> {
    let g = load_named(env)?;
    for &n in nodes {
        g.check(n)?;
    }
    let mut planners: Vec<PlannerKind> = Vec::new();
    for o in results
        .outcomes
        .iter()
        .filter(|o| o.cell.environment == env)
    {
        if !planners.contains(&o.cell.planner) {
            planners.push(o.cell.planner);
        }
    }
    let window = CROWDING_WINDOW_S as usize + 1;
    let mut series = BTreeMap::new();
    for &p in &planners {
        let runs: Vec<&SimResult> = results
            .outcomes
            .iter()
            .filter(|o| o.cell.environment == env && o.cell.planner == p)
            .filter_map(|o| o.result.as_ref().ok())
            .collect();
        for &n in nodes {
            let per_run: Vec<Vec<u32>> = runs
                .iter()
                .map(|r| {
                    (0..window)
                        .map(|t| r.occupancy_series.get(t).map_or(0, |row| row[n.index()]))
                        .collect()
                })
                .collect();
            let mut mean = mean_series(per_run.iter().map(Vec::as_slice));
            mean.resize(window, 0.0);
            series.insert((p, n), mean);
        }
    }
    Ok(CrowdingTable {
        environment: env.to_string(),
        planners,
        nodes: nodes.to_vec(),
        series,
    })
}

fn write_file(path: PathBuf, contents: &[u8]) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `runs.csv`, `aggregates.csv` and one `crowding_<env>.csv` per
/// environment with watched nodes. Returns the paths written.
pub fn write_outputs(
    dir: &Path,
    spec: &ExperimentSpec,
    results: &ExperimentResults,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let rows = results.rows();
    let mut runs = Vec::new();
    write_runs_csv(&mut runs, &rows)?;
    let mut aggregates = Vec::new();
    write_aggregates_csv(&mut aggregates, &aggregate(&rows))?;
    let mut written = vec![
        write_file(dir.join("runs.csv"), &runs)?,
        write_file(dir.join("aggregates.csv"), &aggregates)?,
    ];
    for env in &spec.environments {
        let nodes = spec.crowding_nodes_for(env);
        if nodes.is_empty() {
            continue;
        }
        let table = export_crowding(results, env, &nodes)?;
        let name = format!("crowding_{}.csv", file_stem(env));
        written.push(write_file(
            dir.join(name),
            crowding_csv(&table)?.as_bytes(),
        )?);
    }
    Ok(written)
}

/// Writes `reward_sweep_<env>_<dist>.csv`.
pub fn write_sweep(dir: &Path, sweep: &RewardSweep) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let name = format!(
        "reward_sweep_{}_{}.csv",
        file_stem(&sweep.environment),
        sweep.distribution.as_str()
    );
    write_file(dir.join(name), sweep_csv(sweep)?.as_bytes())
}

/// Environment names may be file paths; only the stem names outputs.
fn file_stem(env: &str) -> String {
    Path::new(env)
        .file_stem()
        .map_or_else(|| env.to_string(), |s| s.to_string_lossy().into_owned())
}
