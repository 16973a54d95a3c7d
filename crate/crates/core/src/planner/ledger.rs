//! Time-expanded remaining capacity per node and directed edge.

use crate::error::{Error, Result};
use crate::graph::{BuildingGraph, DirEdge, NodeId};

use super::Route;

/// Capacities used to emulate an unconstrained building.
pub const UNCAPACITATED: u32 = 1_000_000;

/// Remaining capacity per (second, entity). Entities are the graph's nodes
/// followed by its directed edges; rows cover seconds `0..=horizon_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapacityLedger {
    horizon_s: u32,
    nodes: usize,
    width: usize,
    max: Vec<u32>,
    avail: Vec<u32>,
}

/// One debited ledger cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Cell {
    pub t: u32,
    pub col: usize,
}

impl CapacityLedger {
    /// Every cell at its entity's maximum capacity.
    pub fn new(g: &BuildingGraph, horizon_s: u32) -> Self {
        let mut max: Vec<u32> = g.nodes().iter().map(|n| n.max_occupancy).collect();
        for e in g.edges() {
            max.push(e.capacity);
            max.push(e.capacity);
        }
        Self::from_max(g.node_count(), max, horizon_s)
    }

    /// Every entity given the same capacity.
    pub fn uniform(g: &BuildingGraph, horizon_s: u32, capacity: u32) -> Self {
        let width = g.node_count() + g.dir_edge_count();
        Self::from_max(g.node_count(), vec![capacity; width], horizon_s)
    }

    fn from_max(nodes: usize, max: Vec<u32>, horizon_s: u32) -> Self {
        let width = max.len();
        let mut avail = Vec::with_capacity((horizon_s as usize + 1) * width);
        for _ in 0..=horizon_s {
            avail.extend_from_slice(&max);
        }
        CapacityLedger {
            horizon_s,
            nodes,
            width,
            max,
            avail,
        }
    }

    pub fn horizon_s(&self) -> u32 {
        self.horizon_s
    }

    #[inline]
    pub(crate) fn node_col(&self, n: NodeId) -> usize {
        n.index()
    }

    #[inline]
    pub(crate) fn edge_col(&self, e: DirEdge) -> usize {
        self.nodes + e.index()
    }

    #[inline]
    pub(crate) fn get(&self, t: u32, col: usize) -> u32 {
        self.avail[t as usize * self.width + col]
    }

    pub fn node_avail(&self, t: u32, n: NodeId) -> u32 {
        self.get(t, self.node_col(n))
    }

    pub fn edge_avail(&self, t: u32, e: DirEdge) -> u32 {
        self.get(t, self.edge_col(e))
    }

    pub fn node_max(&self, n: NodeId) -> u32 {
        self.max[self.node_col(n)]
    }

    pub fn edge_max(&self, e: DirEdge) -> u32 {
        self.max[self.edge_col(e)]
    }

    /// Overrides one node cell, clamped to the node's maximum.
    pub fn set_node_avail(&mut self, t: u32, n: NodeId, value: u32) {
        let col = self.node_col(n);
        self.avail[t as usize * self.width + col] = value.min(self.max[col]);
    }

    /// Overrides one directed-edge cell, clamped to the edge's maximum.
    pub fn set_edge_avail(&mut self, t: u32, e: DirEdge, value: u32) {
        let col = self.edge_col(e);
        self.avail[t as usize * self.width + col] = value.min(self.max[col]);
    }

    /// Ledger cells a single evacuee following `route` occupies. The start
    /// node is held at the departure second; a stay holds the node for the
    /// next second; a move holds the directed edge for every travel second
    /// (only the first one for doorways) and the destination node on the
    /// arrival second. Cells past the horizon are unconstrained and omitted.
    pub(crate) fn footprint(&self, g: &BuildingGraph, route: &Route) -> Result<Vec<Cell>> {
        let steps = &route.steps;
        let Some(&first) = steps.first() else {
            return Err(Error::InvalidRoute("route has no steps".into()));
        };
        g.check(first)?;
        let mut cells = Vec::with_capacity(steps.len() * 2);
        let mut t = route.depart_t;
        let push = |t: u32, col: usize, cells: &mut Vec<Cell>| {
            if t <= self.horizon_s {
                cells.push(Cell { t, col });
            }
        };
        push(t, self.node_col(first), &mut cells);
        for pair in steps.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            g.check(to)?;
            if from == to {
                t += 1;
                push(t, self.node_col(to), &mut cells);
                continue;
            }
            let nb = g.neighbor(from, to).ok_or_else(|| {
                Error::InvalidRoute(format!("steps {from} and {to} are not adjacent"))
            })?;
            let dir = g.dir_edge(from, to).expect("adjacent");
            let held = if g.edge(nb.edge).door_kind.is_door() {
                1
            } else {
                nb.sojourn_s
            };
            for s in 1..=held {
                push(t + s, self.edge_col(dir), &mut cells);
            }
            t += nb.sojourn_s + 1;
            push(t, self.node_col(to), &mut cells);
        }
        Ok(cells)
    }

    /// Largest number of evacuees that can follow `route` without driving
    /// any cell negative.
    pub fn compute_maxsend(&self, g: &BuildingGraph, route: &Route) -> Result<u32> {
        let cells = self.footprint(g, route)?;
        let k = cells
            .iter()
            .map(|c| self.get(c.t, c.col))
            .min()
            .unwrap_or(0);
        if k == 0 {
            Err(Error::InfeasibleRoute(route.steps[0]))
        } else {
            Ok(k)
        }
    }

    /// Debits `k` along the route footprint; nothing changes on error.
    pub fn reserve_capacity(&mut self, g: &BuildingGraph, route: &Route, k: u32) -> Result<()> {
        self.reserve_tracked(g, route, k).map(|_| ())
    }

    /// As [`Self::reserve_capacity`], returning the latest second at which a
    /// cell dropped to zero (the point past which action feasibility is
    /// unchanged).
    pub(crate) fn reserve_tracked(
        &mut self,
        g: &BuildingGraph,
        route: &Route,
        k: u32,
    ) -> Result<Option<u32>> {
        if k == 0 {
            return Ok(None);
        }
        let cells = self.footprint(g, route)?;
        let available = cells
            .iter()
            .map(|c| self.get(c.t, c.col))
            .min()
            .unwrap_or(u32::MAX);
        if k > available {
            return Err(Error::OverReservation {
                requested: k,
                available,
            });
        }
        let mut exhausted = None;
        for c in cells {
            let cell = &mut self.avail[c.t as usize * self.width + c.col];
            *cell -= k;
            if *cell == 0 {
                exhausted = exhausted.max(Some(c.t));
            }
        }
        Ok(exhausted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_bundled;

    #[test]
    fn stay_route_bottleneck_is_the_node() {
        let g = load_bundled("acyclic_school").unwrap();
        let ledger = CapacityLedger::new(&g, 60);
        let r = Route::new(vec![NodeId(19)], 0);
        assert_eq!(ledger.compute_maxsend(&g, &r).unwrap(), 20);
    }

    #[test]
    fn zero_reservation_is_a_no_op() {
        let g = load_bundled("acyclic_school").unwrap();
        let mut ledger = CapacityLedger::new(&g, 60);
        let fresh = ledger.clone();
        let r = Route::new(vec![NodeId(2), NodeId(1), NodeId(52)], 0);
        ledger.reserve_capacity(&g, &r, 0).unwrap();
        assert_eq!(ledger, fresh);
    }

    #[test]
    fn over_reservation_is_atomic() {
        let g = load_bundled("acyclic_school").unwrap();
        let mut ledger = CapacityLedger::new(&g, 60);
        let fresh = ledger.clone();
        let r = Route::new(vec![NodeId(2), NodeId(1), NodeId(52)], 0);
        assert!(matches!(
            ledger.reserve_capacity(&g, &r, 5),
            Err(Error::OverReservation {
                requested: 5,
                available: 4
            })
        ));
        assert_eq!(ledger, fresh);
    }

    #[test]
    fn non_adjacent_route_rejected() {
        let g = load_bundled("acyclic_school").unwrap();
        let ledger = CapacityLedger::new(&g, 60);
        let r = Route::new(vec![NodeId(2), NodeId(52)], 0);
        assert!(matches!(
            ledger.compute_maxsend(&g, &r),
            Err(Error::InvalidRoute(_))
        ));
    }
}
