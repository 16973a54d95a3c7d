//! `egress`: runs scenario matrices and writes their CSV outputs.
//!
//! Exit status is 0 on success, 1 when any simulated cell failed and 2 for
//! configuration or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use egress::experiment::{
    default_crowding_nodes, export_crowding, read_runs_csv, run_experiment, summarize, summary_csv,
    sweep_reward, write_outputs, write_sweep, ExperimentSpec,
};
use egress::graph::{load_environment_file, NodeId, NodeKind};
use egress::sim::Distribution;

#[derive(Debug, Parser)]
#[command(
    name = "egress",
    version,
    about = "Evacuation planning experiments under a moving threat"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the matrix described by a JSON experiment spec.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Sweep the exit reward for the capacity-constrained planner.
    SweepReward {
        #[arg(long)]
        env: String,
        /// `rooms_only` or `rooms_and_halls`.
        #[arg(long)]
        dist: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: u32,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Seed-averaged occupancy of chosen nodes over the first 75 s.
    Crowding {
        #[arg(long)]
        env: String,
        /// Comma-separated node ids; bundled schools have defaults.
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: u32,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Pool a runs.csv by environment, planner, spawn category and distribution.
    Summarize {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load and validate an environment file.
    ValidateEnv { file: PathBuf },
}

/// What a successful command reports back.
enum Outcome {
    Done,
    CellFailures(usize),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::CellFailures(n)) => {
            eprintln!("egress: {n} cell(s) failed; see the error column of runs.csv");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("egress: {}", describe(&e));
            ExitCode::from(2)
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Run { spec, out, workers } => run(&spec, &out, workers),
        Command::SweepReward {
            env,
            dist,
            out,
            seeds,
            workers,
        } => sweep(&env, &dist, &out, seeds, workers),
        Command::Crowding {
            env,
            nodes,
            out,
            seeds,
            workers,
        } => crowding(&env, &nodes, &out, seeds, workers),
        Command::Summarize { runs, out } => summarize_runs(&runs, &out),
        Command::ValidateEnv { file } => validate_env(&file),
    }
}

fn read_spec(path: &Path) -> Result<ExperimentSpec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing experiment spec {}", path.display()))
}

fn run(spec_path: &Path, out: &Path, workers: Option<usize>) -> Result<Outcome> {
    let mut spec = read_spec(spec_path)?;
    spec.output_dir = Some(out.to_path_buf());
    let results = run_experiment(&spec, workers)?;
    for path in write_outputs(out, &spec, &results)? {
        println!("wrote {}", path.display());
    }
    Ok(match results.failures() {
        0 => Outcome::Done,
        n => Outcome::CellFailures(n),
    })
}

fn sweep(env: &str, dist: &str, out: &Path, seeds: u32, workers: Option<usize>) -> Result<Outcome> {
    let distribution: Distribution = dist.parse()?;
    let mut spec = ExperimentSpec::new(&[env]);
    spec.seed_count = seeds;
    let sweep = sweep_reward(&spec, env, distribution, workers)?;
    let path = write_sweep(out, &sweep)?;
    println!("wrote {}", path.display());
    for (v, m) in sweep.values.iter().zip(sweep.final_means()) {
        println!("reward_max {v}: {m:.2} casualties at the horizon");
    }
    Ok(match sweep.failures {
        0 => Outcome::Done,
        n => Outcome::CellFailures(n),
    })
}

fn crowding(
    env: &str,
    nodes: &[u32],
    out: &Path,
    seeds: u32,
    workers: Option<usize>,
) -> Result<Outcome> {
    let nodes: Vec<NodeId> = if nodes.is_empty() {
        match default_crowding_nodes(env) {
            Some(n) => n,
            None => bail!("--nodes is required for environment `{env}`"),
        }
    } else {
        nodes.iter().map(|&n| NodeId(n)).collect()
    };
    let mut spec = ExperimentSpec::new(&[env]);
    spec.seed_count = seeds;
    spec.crowding_nodes.insert(env.to_string(), nodes.clone());
    let results = run_experiment(&spec, workers)?;
    // checks the node ids before anything is written
    export_crowding(&results, env, &nodes)?;
    for path in write_outputs(out, &spec, &results)? {
        if path
            .file_name()
            .is_some_and(|f| f.to_string_lossy().starts_with("crowding_"))
        {
            println!("wrote {}", path.display());
        }
    }
    Ok(match results.failures() {
        0 => Outcome::Done,
        n => Outcome::CellFailures(n),
    })
}

fn summarize_runs(runs: &Path, out: &Path) -> Result<Outcome> {
    let file = std::fs::File::open(runs).with_context(|| format!("opening {}", runs.display()))?;
    let rows = read_runs_csv(file).with_context(|| format!("reading {}", runs.display()))?;
    let failed = rows.iter().filter(|r| r.failed()).count();
    let table = summary_csv(&summarize(&rows))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(out, table).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {}", out.display());
    Ok(match failed {
        0 => Outcome::Done,
        n => Outcome::CellFailures(n),
    })
}

fn validate_env(file: &Path) -> Result<Outcome> {
    let g = load_environment_file(file)?;
    let count = |k| g.nodes_of_kind(k).len();
    println!(
        "{}: {} nodes ({} halls, {} rooms, {} exits), {} edges",
        g.name(),
        g.node_count(),
        count(NodeKind::Hall),
        count(NodeKind::Room),
        count(NodeKind::Exit),
        g.edges().len()
    );
    Ok(Outcome::Done)
}
