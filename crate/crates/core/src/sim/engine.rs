//! The per-second event loop.

use std::collections::BTreeMap;

use crate::baselines::{naive_policy, plan_natural_response};
use crate::error::{Error, Result};
use crate::graph::{load_bundled, load_environment_file, BuildingGraph, DirEdge, NodeId};
use crate::planner::plan_ccasters;
use crate::rng::{stream, SHOOTER_STREAM};
use crate::threat::harm_field;

use super::config::{PlannerKind, ReplanPolicy, ScenarioConfig};
use super::resource::Resource;
use super::shooter::Shooter;
use super::{
    adjudicate, collect_metrics, Entity, Position, SecondRecord, SimResult, TraceEvent, TraceKind,
    Verdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Active,
    Escaped,
    Dead,
}

#[derive(Clone, Debug)]
struct Evacuee {
    pos: Position,
    status: Status,
    /// Route being followed; `route[cursor]` is the node the evacuee is at
    /// or travelling toward.
    route: Vec<NodeId>,
    cursor: usize,
    /// Holds a token of the directed edge it is on.
    edge_token: bool,
    /// Resource column it is queued on.
    waiting_on: Option<usize>,
}

struct World<'g> {
    g: &'g BuildingGraph,
    cfg: &'g ScenarioConfig,
    resources: Vec<Resource>,
    evacuees: Vec<Evacuee>,
    shooter: Shooter,
    traces: Option<Vec<TraceEvent>>,
    records: Vec<SecondRecord>,
    planner_calls: u32,
    /// Counts for the second being processed.
    new_casualties: u32,
    new_escapes: u32,
    in_los: u32,
}

/// Loads the configured environment and runs one scenario.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimResult> {
    let g = match load_bundled(&cfg.environment) {
        Err(Error::UnknownEnvironment(_)) => {
            load_environment_file(std::path::Path::new(&cfg.environment))?
        }
        other => other?,
    };
    run_simulation_on(&g, cfg)
}

/// Runs one scenario on an already loaded graph.
pub fn run_simulation_on(g: &BuildingGraph, cfg: &ScenarioConfig) -> Result<SimResult> {
    cfg.validate(g)?;
    let mut resources: Vec<Resource> = g
        .nodes()
        .iter()
        .map(|n| Resource::new(n.max_occupancy))
        .collect();
    for e in g.edges() {
        let tokens = if e.door_kind.is_door() {
            e.throughput_per_s
        } else {
            e.capacity
        };
        resources.push(Resource::new(tokens));
        resources.push(Resource::new(tokens));
    }

    let mut evacuees = Vec::new();
    let mut traces = cfg.record_traces.then(Vec::new);
    for n in cfg.evacuee_distribution.start_nodes(g) {
        for _ in 0..cfg.evacuees_per_node {
            resources[n.index()].seize();
            if let Some(tr) = traces.as_mut() {
                tr.push(TraceEvent {
                    t: 0,
                    agent: evacuees.len() as u32,
                    kind: TraceKind::Spawn { node: n },
                });
            }
            evacuees.push(Evacuee {
                pos: Position::Node(n),
                status: Status::Active,
                route: vec![n],
                cursor: 0,
                edge_token: false,
                waiting_on: None,
            });
        }
    }

    let mut world = World {
        g,
        cfg,
        resources,
        shooter: Shooter::new(g, cfg.shooter_spawn, stream(cfg.seed, SHOOTER_STREAM)),
        evacuees,
        traces,
        records: Vec::with_capacity(cfg.horizon_s as usize + 1),
        planner_calls: 0,
        new_casualties: 0,
        new_escapes: 0,
        in_los: 0,
    };
    world.run()
}

impl World<'_> {
    fn run(&mut self) -> Result<SimResult> {
        let horizon = self.cfg.horizon_s;
        let mut detected = self.shooter.node_at(0);
        self.try_replan(0, detected)?;
        self.adjudicate(0);
        self.record(0);

        for t in 1..=horizon {
            if self.active() == 0 {
                break;
            }
            self.shooter.step(self.g, t);
            let seen = self.shooter.node_at(t);
            let due = match self.cfg.replan_policy {
                ReplanPolicy::OnShooterNodeChange => seen != detected,
                ReplanPolicy::EveryKSeconds(k) => t % k == 0,
            };
            detected = seen;
            if due && t < horizon {
                self.try_replan(t, detected)?;
            }
            self.release_door_tokens(t);
            for r in &mut self.resources {
                r.settle();
            }
            for i in 0..self.evacuees.len() {
                if self.evacuees[i].status == Status::Active {
                    self.act(i, t);
                }
            }
            self.adjudicate(t);
            self.record(t);
        }
        Ok(self.result())
    }

    fn result(&mut self) -> SimResult {
        let initial = self.evacuees.len() as u32;
        let mut res = collect_metrics(initial, self.cfg.horizon_s, &self.records);
        res.planner_calls = self.planner_calls;
        res.agent_traces = self.traces.clone();
        res
    }

    fn active(&self) -> usize {
        self.evacuees
            .iter()
            .filter(|e| e.status == Status::Active)
            .count()
    }

    fn trace(&mut self, t: u32, agent: usize, kind: TraceKind) {
        if let Some(tr) = self.traces.as_mut() {
            tr.push(TraceEvent {
                t,
                agent: agent as u32,
                kind,
            });
        }
    }

    fn entity(&self, col: usize) -> Entity {
        let n = self.g.node_count();
        if col < n {
            Entity::Node(NodeId::from_index(col))
        } else {
            let d = DirEdge::new((col - n) / 2, (col - n).is_multiple_of(2));
            let (a, b) = self.g.dir_edge_endpoints(d);
            Entity::Edge(a, b)
        }
    }

    fn edge_col(&self, from: NodeId, to: NodeId) -> usize {
        self.g.node_count() + self.g.dir_edge(from, to).expect("adjacent").index()
    }

    /// Queues agent `i` on resource `col` and reports whether it was granted.
    fn request(&mut self, i: usize, col: usize, t: u32) -> bool {
        if self.evacuees[i].waiting_on != Some(col) {
            if let Some(old) = self.evacuees[i].waiting_on {
                self.resources[old].cancel(i as u32);
                let entity = self.entity(old);
                self.trace(t, i, TraceKind::Cancel { entity });
            }
            self.evacuees[i].waiting_on = Some(col);
            let entity = self.entity(col);
            self.trace(t, i, TraceKind::Request { entity });
        }
        let granted = self.resources[col].request(i as u32);
        if granted {
            self.evacuees[i].waiting_on = None;
            let entity = self.entity(col);
            self.trace(t, i, TraceKind::Grant { entity });
        }
        granted
    }

    fn release(&mut self, i: usize, col: usize, t: u32) {
        self.resources[col].release();
        let entity = self.entity(col);
        self.trace(t, i, TraceKind::Release { entity });
    }

    fn cancel_wait(&mut self, i: usize, t: u32) {
        if let Some(col) = self.evacuees[i].waiting_on.take() {
            self.resources[col].cancel(i as u32);
            let entity = self.entity(col);
            self.trace(t, i, TraceKind::Cancel { entity });
        }
    }

    fn release_door_tokens(&mut self, t: u32) {
        for i in 0..self.evacuees.len() {
            let e = &self.evacuees[i];
            if e.status != Status::Active || !e.edge_token {
                continue;
            }
            if let Position::Edge {
                from,
                to,
                edge,
                entered,
                ..
            } = e.pos
            {
                if self.g.edge(edge).door_kind.is_door() && t > entered {
                    self.evacuees[i].edge_token = false;
                    let col = self.edge_col(from, to);
                    self.release(i, col, t);
                }
            }
        }
    }

    fn act(&mut self, i: usize, t: u32) {
        match self.evacuees[i].pos {
            Position::Edge {
                from,
                to,
                entered,
                sojourn,
                ..
            } => {
                if t < entered + sojourn {
                    return;
                }
                if self.g.is_exit(to) {
                    self.leave_edge(i, from, to, t);
                    self.evacuees[i].status = Status::Escaped;
                    self.new_escapes += 1;
                    self.trace(t, i, TraceKind::Escape { node: to });
                } else if self.request(i, to.index(), t) {
                    self.leave_edge(i, from, to, t);
                    self.evacuees[i].pos = Position::Node(to);
                    self.trace(t, i, TraceKind::Arrive { node: to });
                }
            }
            Position::Node(n) => {
                let e = &self.evacuees[i];
                let Some(&next) = e.route.get(e.cursor + 1) else {
                    return;
                };
                if next == n {
                    self.evacuees[i].cursor += 1;
                    return;
                }
                let col = self.edge_col(n, next);
                if self.request(i, col, t) {
                    self.release(i, n.index(), t);
                    let nb = self.g.neighbor(n, next).expect("adjacent");
                    let e = &mut self.evacuees[i];
                    e.cursor += 1;
                    e.edge_token = true;
                    e.pos = Position::Edge {
                        from: n,
                        to: next,
                        edge: nb.edge,
                        entered: t,
                        sojourn: nb.sojourn_s,
                    };
                }
            }
        }
    }

    fn leave_edge(&mut self, i: usize, from: NodeId, to: NodeId, t: u32) {
        if self.evacuees[i].edge_token {
            self.evacuees[i].edge_token = false;
            let col = self.edge_col(from, to);
            self.release(i, col, t);
        }
    }

    fn adjudicate(&mut self, t: u32) {
        let shooter = self.shooter.pos();
        for i in 0..self.evacuees.len() {
            if self.evacuees[i].status != Status::Active {
                continue;
            }
            let pos = self.evacuees[i].pos;
            match adjudicate(self.g, pos, shooter, t) {
                Verdict::Casualty => {
                    self.new_casualties += 1;
                    self.cancel_wait(i, t);
                    match pos {
                        Position::Node(n) => self.release(i, n.index(), t),
                        Position::Edge { from, to, .. } => self.leave_edge(i, from, to, t),
                    }
                    self.evacuees[i].status = Status::Dead;
                    self.trace(
                        t,
                        i,
                        TraceKind::Casualty {
                            node: pos.node_at(t),
                        },
                    );
                }
                Verdict::InLos => self.in_los += 1,
                Verdict::Safe => {}
            }
        }
    }

    fn record(&mut self, _t: u32) {
        let n = self.g.node_count();
        let mut occupancy = vec![0u32; n];
        let mut on_edge = vec![0u32; self.g.dir_edge_count()];
        for e in self.evacuees.iter().filter(|e| e.status == Status::Active) {
            match e.pos {
                Position::Node(node) => occupancy[node.index()] += 1,
                Position::Edge { from, to, edge, .. } => {
                    // doorway capacity is only taken by token holders
                    if !self.g.edge(edge).door_kind.is_door() || e.edge_token {
                        on_edge[self.g.dir_edge(from, to).expect("adjacent").index()] += 1;
                    }
                }
            }
        }
        let mut violations = 0;
        for (i, &count) in occupancy.iter().enumerate() {
            if count > self.resources[i].max_tokens() {
                violations += 1;
            }
        }
        for (d, &count) in on_edge.iter().enumerate() {
            if count > self.resources[n + d].max_tokens() {
                violations += 1;
            }
        }
        debug_assert_eq!(violations, 0, "capacity exceeded");
        self.records.push(SecondRecord {
            occupancy,
            new_casualties: std::mem::take(&mut self.new_casualties),
            new_escapes: std::mem::take(&mut self.new_escapes),
            in_los: std::mem::take(&mut self.in_los),
            violations,
        });
    }

    fn try_replan(&mut self, t: u32, shooter_node: NodeId) -> Result<()> {
        self.replan(t, shooter_node).map_err(|source| {
            let partial = self.result();
            Error::Simulation {
                t,
                source: Box::new(source),
                partial: Box::new(partial),
            }
        })
    }

    /// Issues fresh routes to every active evacuee. Travellers are planned
    /// from the node they are heading to.
    fn replan(&mut self, t: u32, shooter_node: NodeId) -> Result<()> {
        let mut groups: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.evacuees.iter().enumerate() {
            if e.status != Status::Active {
                continue;
            }
            let at = match e.pos {
                Position::Node(n) => n,
                Position::Edge { to, .. } => to,
            };
            groups.entry(at).or_default().push(i);
        }
        if groups.is_empty() {
            return Ok(());
        }
        self.planner_calls += 1;
        let lookahead = self.cfg.lookahead_s.min(self.cfg.horizon_s - t);
        let mut routes: Vec<(usize, Vec<NodeId>)> = Vec::new();
        match self.cfg.planner {
            PlannerKind::Ccasters => {
                let occupancy = groups.iter().map(|(&n, v)| (n, v.len() as u32)).collect();
                let mut params = self.cfg.planner_params();
                params.lookahead_s = lookahead;
                let plan = plan_ccasters(self.g, &occupancy, shooter_node, &params)?;
                for (n, members) in &groups {
                    // evacuees standing at the node are served before those
                    // still walking toward it, so arrivals cannot starve them
                    let (mut who, arriving): (Vec<usize>, Vec<usize>) = members
                        .iter()
                        .partition(|&&i| matches!(self.evacuees[i].pos, Position::Node(_)));
                    who.extend(arriving);
                    let mut who = who.into_iter();
                    for a in plan.assignments.get(n).into_iter().flatten() {
                        for i in who.by_ref().take(a.assigned as usize) {
                            routes.push((i, a.route.steps.clone()));
                        }
                    }
                }
            }
            PlannerKind::NaiveAsters => {
                let h = harm_field(self.g, shooter_node, lookahead)?;
                let reward = self.cfg.planner_params().reward;
                let policy = naive_policy(self.g, &h, &reward)?;
                for (&n, members) in &groups {
                    let steps = match policy.route(n, 0) {
                        Ok(r) => r.steps,
                        Err(Error::NoFeasibleAction { .. }) => vec![n],
                        Err(e) => return Err(e),
                    };
                    routes.extend(members.iter().map(|&i| (i, steps.clone())));
                }
            }
            PlannerKind::NaturalResponse => {
                for (&n, members) in &groups {
                    let r =
                        plan_natural_response(self.g, n, shooter_node, &self.cfg.natural_response)?;
                    routes.extend(members.iter().map(|&i| (i, r.steps.clone())));
                }
            }
        }
        for (i, steps) in routes {
            // a queued request survives only if the new route still needs it
            let keep = match self.evacuees[i].pos {
                Position::Edge { to, .. } => Some(to.index()),
                Position::Node(n) => steps
                    .get(1)
                    .filter(|&&next| next != n)
                    .map(|&next| self.edge_col(n, next)),
            };
            if self.evacuees[i].waiting_on != keep {
                self.cancel_wait(i, t);
            }
            if self.traces.is_some() {
                self.trace(
                    t,
                    i,
                    TraceKind::Reroute {
                        steps: steps.clone(),
                    },
                );
            }
            let e = &mut self.evacuees[i];
            e.route = steps;
            e.cursor = 0;
        }
        Ok(())
    }
}
