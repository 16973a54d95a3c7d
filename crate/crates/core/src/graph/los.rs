//! Line-of-sight derivation from wall segments.

use serde::{Deserialize, Serialize};

use super::NodeId;

/// An opaque wall segment between two points, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall(pub [f64; 2], pub [f64; 2]);

fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> i8 {
    let v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    if v.abs() < 1e-12 {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn on_segment(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> bool {
    q[0] <= p[0].max(r[0]) + 1e-12
        && q[0] >= p[0].min(r[0]) - 1e-12
        && q[1] <= p[1].max(r[1]) + 1e-12
        && q[1] >= p[1].min(r[1]) - 1e-12
}

/// Closed-segment intersection test: touching counts as blocking.
pub(crate) fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(p1, q1, p2))
        || (o2 == 0 && on_segment(p1, q2, p2))
        || (o3 == 0 && on_segment(q1, p1, q2))
        || (o4 == 0 && on_segment(q1, p2, q2))
}

/// Visibility sets for points indexed by node position: two nodes see each
/// other when the segment joining them crosses no wall. Every node sees
/// itself.
pub fn visibility_from_walls(points: &[[f64; 2]], walls: &[Wall]) -> Vec<Vec<NodeId>> {
    let n = points.len();
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        out[i].push(NodeId::from_index(i));
        for j in (i + 1)..n {
            let blocked = walls
                .iter()
                .any(|w| segments_intersect(points[i], points[j], w.0, w.1));
            if !blocked {
                out[i].push(NodeId::from_index(j));
                out[j].push(NodeId::from_index(i));
            }
        }
    }
    for set in &mut out {
        set.sort();
    }
    out
}
