//! CSV rows and the tables derived from them.
//!
//! Floats are written with fixed precision so reruns are byte-identical.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Cell, CrowdingTable, RewardSweep};
use crate::error::{Error, Result};
use crate::sim::SimResult;

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// One simulated run as written to `runs.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub environment: String,
    pub planner: String,
    pub distribution: String,
    pub spawn: u32,
    pub spawn_category: String,
    pub seed: u64,
    pub reward_max: f64,
    pub initial: u32,
    pub casualties: u32,
    pub escapes: u32,
    pub remaining: u32,
    pub los_seconds: u64,
    pub capacity_violations: u32,
    pub planner_calls: u32,
    /// Empty unless the run failed.
    pub error: String,
}

impl RunRow {
    pub(crate) fn new(cell: &Cell, result: std::result::Result<&SimResult, &String>) -> Self {
        let mut row = RunRow {
            environment: cell.environment.clone(),
            planner: cell.planner.as_str().to_string(),
            distribution: cell.distribution.as_str().to_string(),
            spawn: cell.spawn.0,
            spawn_category: cell.spawn_category.as_str().to_string(),
            seed: cell.seed,
            reward_max: cell.reward_max,
            initial: 0,
            casualties: 0,
            escapes: 0,
            remaining: 0,
            los_seconds: 0,
            capacity_violations: 0,
            planner_calls: 0,
            error: String::new(),
        };
        match result {
            Ok(r) => {
                row.initial = r.initial;
                row.casualties = r.casualties;
                row.escapes = r.escapes;
                row.remaining = r.remaining;
                row.los_seconds = r.los_seconds_total;
                row.capacity_violations = r.capacity_violations;
                row.planner_calls = r.planner_calls;
            }
            Err(e) => row.error = e.clone(),
        }
        row
    }

    pub fn failed(&self) -> bool {
        !self.error.is_empty()
    }
}

pub fn write_runs_csv<W: Write>(w: W, rows: &[RunRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_runs_csv<R: Read>(r: R) -> Result<Vec<RunRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for row in rdr.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[derive(Default)]
struct Acc {
    n: u32,
    initial: f64,
    casualties: Vec<f64>,
    escapes: Vec<f64>,
    los: Vec<f64>,
}

impl Acc {
    fn push(&mut self, r: &RunRow) {
        self.n += 1;
        self.initial += f64::from(r.initial);
        self.casualties.push(f64::from(r.casualties));
        self.escapes.push(f64::from(r.escapes));
        self.los.push(r.los_seconds as f64);
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn pct(part: f64, whole: f64) -> f64 {
    if whole > 0.0 {
        100.0 * part / whole
    } else {
        0.0
    }
}

/// Seed statistics for one (environment, planner, distribution, spawn).
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub environment: String,
    pub planner: String,
    pub distribution: String,
    pub spawn: u32,
    pub spawn_category: String,
    pub runs: u32,
    pub initial_mean: f64,
    pub casualties_mean: f64,
    pub casualties_std: f64,
    pub casualties_pct: f64,
    pub escapes_mean: f64,
    pub escapes_std: f64,
    pub escapes_pct: f64,
    pub los_mean: f64,
    pub los_std: f64,
}

/// Groups successful runs by cell, keeping first-seen order.
pub fn aggregate(rows: &[RunRow]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, String, String, u32, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String, String, u32, String), Acc> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.failed()) {
        let key = (
            r.environment.clone(),
            r.planner.clone(),
            r.distribution.clone(),
            r.spawn,
            r.spawn_category.clone(),
        );
        let acc = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Acc::default()
        });
        acc.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let a = &groups[&key];
            let initial = a.initial / f64::from(a.n);
            let (env, planner, dist, spawn, cat) = key;
            AggregateRow {
                environment: env,
                planner,
                distribution: dist,
                spawn,
                spawn_category: cat,
                runs: a.n,
                initial_mean: initial,
                casualties_mean: mean(&a.casualties),
                casualties_std: std_dev(&a.casualties),
                casualties_pct: pct(mean(&a.casualties), initial),
                escapes_mean: mean(&a.escapes),
                escapes_std: std_dev(&a.escapes),
                escapes_pct: pct(mean(&a.escapes), initial),
                los_mean: mean(&a.los),
                los_std: std_dev(&a.los),
            }
        })
        .collect()
}

pub fn write_aggregates_csv<W: Write>(w: W, rows: &[AggregateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "environment",
        "planner",
        "distribution",
        "spawn",
        "spawn_category",
        "runs",
        "initial_mean",
        "casualties_mean",
        "casualties_std",
        "casualties_pct",
        "escapes_mean",
        "escapes_std",
        "escapes_pct",
        "los_mean",
        "los_std",
    ])?;
    for r in rows {
        out.write_record([
            r.environment.clone(),
            r.planner.clone(),
            r.distribution.clone(),
            r.spawn.to_string(),
            r.spawn_category.clone(),
            r.runs.to_string(),
            f4(r.initial_mean),
            f4(r.casualties_mean),
            f4(r.casualties_std),
            f4(r.casualties_pct),
            f4(r.escapes_mean),
            f4(r.escapes_std),
            f4(r.escapes_pct),
            f4(r.los_mean),
            f4(r.los_std),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Casualty, escape and sight-line figures for one (environment, planner,
/// spawn category, distribution), pooled over spawns and seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub environment: String,
    pub planner: String,
    pub spawn_category: String,
    pub distribution: String,
    pub runs: u32,
    pub casualties_mean: f64,
    pub casualties_pct: f64,
    pub escapes_mean: f64,
    pub escapes_pct: f64,
    pub los_mean: f64,
}

pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    type Key = (String, String, String, String);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, Acc> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.failed()) {
        let key = (
            r.environment.clone(),
            r.planner.clone(),
            r.spawn_category.clone(),
            r.distribution.clone(),
        );
        let acc = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Acc::default()
        });
        acc.push(r);
    }
    order.sort_by(|a, b| (&a.0, &a.2, &a.3, &a.1).cmp(&(&b.0, &b.2, &b.3, &b.1)));
    order
        .into_iter()
        .map(|key| {
            let a = &groups[&key];
            let initial = a.initial / f64::from(a.n);
            SummaryRow {
                environment: key.0,
                planner: key.1,
                spawn_category: key.2,
                distribution: key.3,
                runs: a.n,
                casualties_mean: mean(&a.casualties),
                casualties_pct: pct(mean(&a.casualties), initial),
                escapes_mean: mean(&a.escapes),
                escapes_pct: pct(mean(&a.escapes), initial),
                los_mean: mean(&a.los),
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record([
        "environment",
        "spawn_category",
        "distribution",
        "planner",
        "runs",
        "casualties_mean",
        "casualties_pct",
        "escapes_mean",
        "escapes_pct",
        "los_mean",
    ])?;
    for r in rows {
        out.write_record([
            r.environment.clone(),
            r.spawn_category.clone(),
            r.distribution.clone(),
            r.planner.clone(),
            r.runs.to_string(),
            f4(r.casualties_mean),
            f4(r.casualties_pct),
            f4(r.escapes_mean),
            f4(r.escapes_pct),
            f4(r.los_mean),
        ])?;
    }
    into_string(out)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

/// `t` plus one column per (planner, node).
pub fn crowding_csv(table: &CrowdingTable) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for p in &table.planners {
        for n in &table.nodes {
            header.push(format!("{}_n{}", p.as_str(), n.0));
        }
    }
    out.write_record(&header)?;
    let len = table.series.values().map(Vec::len).max().unwrap_or(0);
    for t in 0..len {
        let mut rec = vec![t.to_string()];
        for p in &table.planners {
            for n in &table.nodes {
                rec.push(f4(table.series[&(*p, *n)][t]));
            }
        }
        out.write_record(&rec)?;
    }
    into_string(out)
}

/// `t` plus one mean cumulative casualty column per reward value; the last
/// row holds the end-of-horizon means.
pub fn sweep_csv(sweep: &RewardSweep) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(sweep.values.iter().map(|v| format!("reward_{v}")));
    out.write_record(&header)?;
    let len = sweep.curves.iter().map(Vec::len).max().unwrap_or(0);
    for t in 0..len {
        let mut rec = vec![t.to_string()];
        rec.extend(
            sweep
                .curves
                .iter()
                .map(|c| f4(c.get(t).copied().unwrap_or(0.0))),
        );
        out.write_record(&rec)?;
    }
    into_string(out)
}
