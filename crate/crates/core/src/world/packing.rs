use std::f64::consts::TAU;

use crate::geom::{dist, Disk, Point};

// Placement keeps this much slack so the exact soundness checks hold despite
// rounding in the polar candidate coordinates.
const SLACK: f64 = 1e-9;
const RINGS: usize = 64;

/// Decides whether balls of the given radii fit disjointly inside `region`
/// and, if so, returns one center per radius (in input order).
///
/// Greedy and deterministic: radii are taken in descending order (ties by
/// input index), the largest goes to the region center, and each following
/// ball takes the first free spot of an inside-out sweep over concentric
/// rings. When that fails, the sweep is retried with the largest ball pushed
/// against the region boundary, which admits e.g. two large balls side by
/// side. Returns `None` when neither attempt succeeds.
pub fn pack_spheres(region: &Disk, radii: &[f64]) -> Option<Vec<Point>> {
    assert!(radii.iter().all(|r| *r >= 0.0), "radii must be nonnegative");
    if radii.is_empty() {
        return Some(Vec::new());
    }
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]));
    let largest = radii[order[0]];
    if largest > region.radius {
        return None;
    }
    let c = region.center;
    let anchors = [c, [c[0] + (region.radius - largest - SLACK).max(0.0), c[1]]];
    anchors
        .iter()
        .find_map(|&anchor| sweep(region, radii, &order, anchor))
}

fn sweep(region: &Disk, radii: &[f64], order: &[usize], anchor: Point) -> Option<Vec<Point>> {
    let mut placed: Vec<(Point, f64)> = Vec::with_capacity(order.len());
    let mut out = vec![[0.0; 2]; radii.len()];
    for (n, &i) in order.iter().enumerate() {
        let r = radii[i];
        let p = if n == 0 {
            anchor
        } else {
            candidates(region, r).find(|&p| {
                placed
                    .iter()
                    .all(|&(q, rq)| dist(p, q) >= r + rq + SLACK)
            })?
        };
        if !region.contains_ball(p, r) {
            return None;
        }
        placed.push((p, r));
        out[i] = p;
    }
    Some(out)
}

/// Center first, then rings of growing radius, each swept counter-clockwise
/// from angle 0 with an arc spacing close to the ring spacing.
fn candidates(region: &Disk, r: f64) -> impl Iterator<Item = Point> + '_ {
    let reach = region.radius - r - SLACK;
    let h = (reach / RINGS as f64).max(0.0);
    let c = region.center;
    (0..=RINGS).flat_map(move |k| {
        let rho = if k == RINGS { reach } else { h * k as f64 };
        let n = if rho <= 0.0 {
            1
        } else {
            ((TAU * rho / h).ceil() as usize).max(1)
        };
        (0..n).map(move |a| {
            let th = TAU * a as f64 / n as f64;
            [c[0] + rho * th.cos(), c[1] + rho * th.sin()]
        })
    })
    .filter(move |&p| reach >= 0.0 && dist(p, c) + r <= region.radius)
}

/// Exact soundness check of a placement.
pub fn placement_is_sound(region: &Disk, radii: &[f64], centers: &[Point]) -> bool {
    radii.len() == centers.len()
        && centers
            .iter()
            .zip(radii)
            .all(|(&p, &r)| region.contains_ball(p, r))
        && (0..radii.len()).all(|i| {
            (i + 1..radii.len()).all(|j| dist(centers[i], centers[j]) >= radii[i] + radii[j])
        })
}
