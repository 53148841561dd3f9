//! Diffeomorphism from a sphere world onto the unit disk with point obstacles.
//!
//! The workspace disk is rescaled onto the unit disk. Each obstacle disk of
//! radius `s` (in unit coordinates) is then purged to its center: a point at
//! distance `d` from the center is moved radially to distance
//! `g(d) = d − s·(1 − σ((d − s)/w))`, where `σ` is the quintic smoothstep.
//! `g` maps `(s, ∞)` onto `(0, ∞)`, is the identity beyond `s + w`, and joins
//! it with matching first and second derivatives. Purging annuli are kept
//! disjoint, so at most one obstacle acts on any point.

use crate::geom::{add, dist, norm, scale, sub, Disk, Mat2, Point};

use super::ControlError;

/// Free space of one moving entity's center: the interior of `boundary` minus
/// the closed `obstacles`, both already adjusted for the entity's radius.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereWorld {
    pub boundary: Disk,
    /// Pairwise disjoint obstacles used by the transform.
    pub obstacles: Vec<Disk>,
    /// Obstacles before merging; the safety monitor measures against these.
    pub raw: Vec<Disk>,
}

impl SphereWorld {
    /// World for an entity of radius `r`: the workspace shrinks by `r`, every
    /// obstacle grows by `r`, and obstacles that then touch are replaced by
    /// their smallest enclosing disk until all are disjoint.
    pub fn for_entity(workspace: Disk, obstacles: &[Disk], r: f64) -> Self {
        let boundary = Disk::new(workspace.center, workspace.radius - r);
        let raw: Vec<Disk> = obstacles.iter().map(|o| Disk::new(o.center, o.radius + r)).collect();
        SphereWorld {
            boundary,
            obstacles: merge_overlapping(raw.clone()),
            raw,
        }
    }

    /// Signed distance to the nearest raw obstacle or the boundary.
    pub fn clearance(&self, x: Point) -> f64 {
        let mut c = self.boundary.radius - dist(x, self.boundary.center);
        for o in &self.raw {
            c = c.min(dist(x, o.center) - o.radius);
        }
        c
    }

    /// Inside the boundary and outside every (merged) obstacle.
    pub fn is_free(&self, x: Point) -> bool {
        dist(x, self.boundary.center) < self.boundary.radius
            && self.obstacles.iter().all(|o| dist(x, o.center) > o.radius)
    }
}

fn enclosing(a: &Disk, b: &Disk) -> Disk {
    let d = dist(a.center, b.center);
    if d + b.radius <= a.radius {
        return *a;
    }
    if d + a.radius <= b.radius {
        return *b;
    }
    let r = (d + a.radius + b.radius) / 2.0;
    // center lies on the segment, r − a.radius away from a's center
    let dir = scale(sub(b.center, a.center), 1.0 / d);
    Disk::new(add(a.center, scale(dir, r - a.radius)), r)
}

fn merge_overlapping(mut disks: Vec<Disk>) -> Vec<Disk> {
    'outer: loop {
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                if disks[i].gap(&disks[j]) <= 0.0 {
                    let m = enclosing(&disks[i], &disks[j]);
                    disks.swap_remove(j);
                    disks[i] = m;
                    continue 'outer;
                }
            }
        }
        return disks;
    }
}

/// Quintic smoothstep and its first two derivatives.
pub(crate) fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let t2 = t * t;
    (
        t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (t - 1.0) * (t - 1.0),
        60.0 * t * (t - 1.0) * (2.0 * t - 1.0),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Purge {
    center: Point,
    radius: f64,
    width: f64,
}

impl Purge {
    /// Radial profile `g(d)` and `g'(d)` on the annulus.
    fn profile(&self, d: f64) -> (f64, f64) {
        let (sg, dsg, _) = smoothstep((d - self.radius) / self.width);
        (d - self.radius * (1.0 - sg), 1.0 + self.radius * dsg / self.width)
    }

    /// Inverse of `g` on `(0, radius + width)`.
    fn invert(&self, target: f64) -> f64 {
        let (mut lo, mut hi) = (self.radius, self.radius + self.width);
        let mut d = self.radius + target.min(self.width);
        for _ in 0..100 {
            let (g, dg) = self.profile(d);
            let err = g - target;
            if err > 0.0 {
                hi = d;
            } else {
                lo = d;
            }
            if err.abs() <= 1e-15 * (1.0 + target) {
                break;
            }
            let newton = d - err / dg;
            d = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        d
    }
}

/// Point-world transform `H` of a [`SphereWorld`].
#[derive(Clone, Debug, PartialEq)]
pub struct Transform {
    center: Point,
    scale: f64,
    purges: Vec<Purge>,
}

impl Transform {
    /// Builds `H` with purging annuli of width at most `width` (unit-disk
    /// units). Obstacles must be disjoint and strictly inside the boundary.
    pub fn new(world: &SphereWorld, width: f64) -> Result<Self, ControlError> {
        let scale = world.boundary.radius;
        if !(scale > 0.0) {
            return Err(ControlError::Geometry("workspace is empty for this entity".into()));
        }
        let unit: Vec<Disk> = world
            .obstacles
            .iter()
            .map(|o| Disk::new(scale_about(o.center, world.boundary.center, scale), o.radius / scale))
            .collect();
        let mut purges = Vec::with_capacity(unit.len());
        for (l, o) in unit.iter().enumerate() {
            let mut room = 1.0 - norm(o.center) - o.radius;
            for (m, p) in unit.iter().enumerate() {
                if m != l {
                    room = room.min(o.gap(p) / 2.0);
                }
            }
            if !(room > 0.0) {
                return Err(ControlError::Geometry(format!(
                    "obstacle at ({:.3}, {:.3}) touches the boundary or another obstacle",
                    world.obstacles[l].center[0], world.obstacles[l].center[1]
                )));
            }
            purges.push(Purge {
                center: o.center,
                radius: o.radius,
                width: width.min(0.9 * room),
            });
        }
        Ok(Transform {
            center: world.boundary.center,
            scale,
            purges,
        })
    }

    /// Obstacle images `b_ℓ` in the unit disk.
    pub fn points(&self) -> Vec<Point> {
        self.purges.iter().map(|p| p.center).collect()
    }

    /// `H(x)` and its Jacobian.
    pub fn forward(&self, x: Point) -> Result<(Point, Mat2), ControlError> {
        let y = scale_about(x, self.center, self.scale);
        if !(norm(y) < 1.0) {
            return Err(ControlError::OutsideFreeSpace(x));
        }
        let inv = 1.0 / self.scale;
        for p in &self.purges {
            let rel = sub(y, p.center);
            let d = norm(rel);
            if d <= p.radius {
                return Err(ControlError::OutsideFreeSpace(x));
            }
            if d < p.radius + p.width {
                let (g, dg) = p.profile(d);
                let nu = g / d;
                let dnu = (dg - nu) / d;
                let chi = add(p.center, scale(rel, nu));
                let k = dnu / d;
                let j = [
                    [(nu + k * rel[0] * rel[0]) * inv, k * rel[0] * rel[1] * inv],
                    [k * rel[1] * rel[0] * inv, (nu + k * rel[1] * rel[1]) * inv],
                ];
                return Ok((chi, j));
            }
        }
        Ok((y, [[inv, 0.0], [0.0, inv]]))
    }

    /// `H⁻¹(χ)` for `χ` in the unit disk minus the obstacle points.
    pub fn inverse(&self, chi: Point) -> Result<Point, ControlError> {
        if !(norm(chi) < 1.0) {
            return Err(ControlError::OutsideFreeSpace(chi));
        }
        let mut y = chi;
        for p in &self.purges {
            let rel = sub(chi, p.center);
            let dc = norm(rel);
            if dc == 0.0 {
                return Err(ControlError::OutsideFreeSpace(chi));
            }
            if dc < p.radius + p.width {
                let d = p.invert(dc);
                y = add(p.center, scale(rel, d / dc));
                break;
            }
        }
        Ok(add(self.center, scale(y, self.scale)))
    }

    /// Smallest half-distance between obstacle points and from each point to
    /// the unit circle; the navigation clearance `r̄` must stay below it.
    pub fn point_clearance(&self) -> f64 {
        let pts = self.points();
        let mut c = f64::INFINITY;
        for (i, b) in pts.iter().enumerate() {
            c = c.min((1.0 - norm(*b)) / 2.0);
            for other in &pts[i + 1..] {
                c = c.min(dist(*b, *other) / 2.0);
            }
        }
        c
    }
}

fn scale_about(x: Point, c: Point, s: f64) -> Point {
    scale(sub(x, c), 1.0 / s)
}
