//! Shooter location rollout and line-of-sight harm fields.
//!
//! The shooter is modelled as an unbiased random walk. Each second, mass at a
//! node splits evenly over staying and every incident edge. Mass that picks
//! an edge is committed to it: it occupies the directed edge for the edge's
//! sojourn time and reaches the far node one second later, where it decides
//! again. Time runs in whole seconds; index `t` means "during second t".

use crate::error::{Error, Result};
use crate::graph::{BuildingGraph, DirEdge, NodeId};

/// Default length of a simulated event.
pub const DEFAULT_HORIZON_S: u32 = 300;

/// Probability of shooter presence per second over nodes and directed edges.
#[derive(Clone, Debug)]
pub struct LocationField {
    horizon_s: u32,
    nodes: usize,
    width: usize,
    mass: Vec<f64>,
}

impl LocationField {
    /// Last second with data; rows cover `0..=horizon_s`.
    pub fn horizon_s(&self) -> u32 {
        self.horizon_s
    }

    #[inline]
    pub fn node_mass(&self, t: u32, n: NodeId) -> f64 {
        self.mass[t as usize * self.width + n.index()]
    }

    #[inline]
    pub fn edge_mass(&self, t: u32, e: DirEdge) -> f64 {
        self.mass[t as usize * self.width + self.nodes + e.index()]
    }

    /// Every entity's mass at second `t`: nodes first, then directed edges.
    pub fn row(&self, t: u32) -> &[f64] {
        let start = t as usize * self.width;
        &self.mass[start..start + self.width]
    }

    pub fn total(&self, t: u32) -> f64 {
        self.row(t).iter().sum()
    }

    /// A field with mass on nodes only (`rows[t][node index]`). Rows are
    /// taken as given and need not sum to one.
    pub fn from_node_rows(g: &BuildingGraph, rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "location field needs at least one row");
        let nodes = g.node_count();
        let width = nodes + g.dir_edge_count();
        let mut mass = vec![0.0; rows.len() * width];
        for (t, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), nodes, "row {t} has the wrong node count");
            mass[t * width..t * width + nodes].copy_from_slice(r);
        }
        LocationField {
            horizon_s: rows.len() as u32 - 1,
            nodes,
            width,
            mass,
        }
    }

    /// Mass on an undirected edge, both directions combined.
    pub fn undirected_edge_mass(&self, t: u32, edge: usize) -> f64 {
        self.edge_mass(t, DirEdge::new(edge, true)) + self.edge_mass(t, DirEdge::new(edge, false))
    }
}

/// Per-node probability of being harmed by the shooter at each second.
#[derive(Clone, Debug)]
pub struct HarmField {
    horizon_s: u32,
    nodes: usize,
    harm: Vec<f64>,
}

impl HarmField {
    pub fn horizon_s(&self) -> u32 {
        self.horizon_s
    }

    #[inline]
    pub fn harm(&self, t: u32, n: NodeId) -> f64 {
        self.harm[t as usize * self.nodes + n.index()]
    }

    pub fn row(&self, t: u32) -> &[f64] {
        let start = t as usize * self.nodes;
        &self.harm[start..start + self.nodes]
    }

    /// A field from explicit rows (`rows[t][node index]`), clamped to [0, 1].
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "harm field needs at least one row");
        let nodes = rows[0].len();
        let mut harm = Vec::with_capacity(rows.len() * nodes);
        for r in rows {
            assert_eq!(r.len(), nodes, "ragged harm rows");
            harm.extend(r.iter().map(|v| v.clamp(0.0, 1.0)));
        }
        HarmField {
            horizon_s: rows.len() as u32 - 1,
            nodes,
            harm,
        }
    }

    /// An all-zero field.
    pub fn zero(nodes: usize, horizon_s: u32) -> Self {
        HarmField {
            horizon_s,
            nodes,
            harm: vec![0.0; (horizon_s as usize + 1) * nodes],
        }
    }

    /// Harm over the seconds `depart_t..=depart_t + sojourn` of a transition.
    fn transition(&self, from: NodeId, to: NodeId, depart_t: u32, sojourn: u32) -> f64 {
        let mut survive = 1.0 - self.harm(depart_t, from);
        for s in depart_t + 1..=depart_t + sojourn {
            survive *= 1.0 - self.harm(s, from).max(self.harm(s, to));
        }
        (1.0 - survive).clamp(0.0, 1.0)
    }
}

/// Rolls the shooter's location distribution forward from `node_s`.
pub fn propagate_location(
    g: &BuildingGraph,
    node_s: NodeId,
    horizon_s: u32,
) -> Result<LocationField> {
    g.check(node_s)?;
    if horizon_s == 0 {
        return Err(Error::ZeroHorizon);
    }
    let n = g.node_count();
    let width = n + g.dir_edge_count();
    let rows = horizon_s as usize + 1;
    let mut mass = vec![0.0; rows * width];
    mass[node_s.index()] = 1.0;

    for t in 0..horizon_s as usize {
        for i in 0..n {
            let m = mass[t * width + i];
            if m == 0.0 {
                continue;
            }
            let node = NodeId::from_index(i);
            let neighbors = g.neighbors(node);
            let share = m / (neighbors.len() + 1) as f64;
            mass[(t + 1) * width + i] += share;
            for nb in neighbors {
                let col = n + g.dir_edge(node, nb.node).expect("adjacent").index();
                let d = nb.sojourn_s as usize;
                for s in t + 1..=(t + d).min(rows - 1) {
                    mass[s * width + col] += share;
                }
                if t + d + 1 < rows {
                    mass[(t + d + 1) * width + nb.node.index()] += share;
                }
            }
        }
    }
    Ok(LocationField {
        horizon_s,
        nodes: n,
        width,
        mass,
    })
}

/// Spreads location mass into per-node harm. Edge mass first counts toward
/// both endpoints; a node's harm is then the larger of that projection and
/// the node mass of every node it shares line of sight with.
pub fn smear_harm(field: &LocationField, g: &BuildingGraph) -> HarmField {
    let n = field.nodes;
    debug_assert_eq!(n, g.node_count());
    let rows = field.horizon_s as usize + 1;
    let mut harm = vec![0.0; rows * n];
    for t in 0..rows {
        let tt = t as u32;
        let row = &mut harm[t * n..(t + 1) * n];
        for (i, cell) in row.iter_mut().enumerate() {
            let node = NodeId::from_index(i);
            let mut v = field.node_mass(tt, node);
            for nb in g.neighbors(node) {
                v = v.max(field.undirected_edge_mass(tt, nb.edge));
            }
            for &m in g.los(node) {
                v = v.max(field.node_mass(tt, m));
            }
            *cell = v.clamp(0.0, 1.0);
        }
    }
    HarmField {
        horizon_s: field.horizon_s,
        nodes: n,
        harm,
    }
}

/// Convenience wrapper: location rollout followed by smearing.
pub fn harm_field(g: &BuildingGraph, node_s: NodeId, horizon_s: u32) -> Result<HarmField> {
    Ok(smear_harm(&propagate_location(g, node_s, horizon_s)?, g))
}

/// Probability of being harmed while staying (`to == from`) or moving along
/// one edge departing at `depart_t`.
pub fn transition_harm_probability(
    h: &HarmField,
    g: &BuildingGraph,
    from: NodeId,
    to: NodeId,
    depart_t: u32,
) -> Result<f64> {
    g.check(from)?;
    g.check(to)?;
    let sojourn = if from == to {
        0
    } else {
        g.neighbor(from, to)
            .ok_or(Error::NotAdjacent { from, to })?
            .sojourn_s
    };
    if depart_t + sojourn > h.horizon_s {
        return Err(Error::HorizonOverflow {
            from,
            depart_t,
            horizon_s: h.horizon_s,
        });
    }
    Ok(h.transition(from, to, depart_t, sojourn))
}

/// Same as [`transition_harm_probability`] with the checks done by the caller.
#[inline]
pub(crate) fn transition_unchecked(
    h: &HarmField,
    from: NodeId,
    to: NodeId,
    depart_t: u32,
    sojourn: u32,
) -> f64 {
    h.transition(from, to, depart_t, sojourn)
}

/// CSV dump of a location field: one row per entity, one column per second.
pub fn location_csv(field: &LocationField, g: &BuildingGraph) -> String {
    let mut out = String::from("entity");
    for t in 0..=field.horizon_s {
        out.push_str(&format!(",{t}"));
    }
    out.push('\n');
    let mut emit = |label: String, col: usize| {
        out.push_str(&label);
        for t in 0..=field.horizon_s {
            out.push_str(&format!(",{:.6}", field.row(t)[col]));
        }
        out.push('\n');
    };
    for node in g.node_ids() {
        emit(format!("N{node}"), node.index());
    }
    for e in 0..g.dir_edge_count() {
        let d = DirEdge::new(e / 2, e % 2 == 0);
        let (a, b) = g.dir_edge_endpoints(d);
        emit(format!("E{a}->{b}"), field.nodes + d.index());
    }
    out
}

/// CSV dump of a harm field: one row per node, one column per second.
pub fn harm_csv(field: &HarmField) -> String {
    let mut out = String::from("node");
    for t in 0..=field.horizon_s {
        out.push_str(&format!(",{t}"));
    }
    out.push('\n');
    for i in 0..field.nodes {
        out.push_str(&format!("N{}", i + 1));
        for t in 0..=field.horizon_s {
            out.push_str(&format!(",{:.6}", field.row(t)[i]));
        }
        out.push('\n');
    }
    out
}
