//! Random sphere worlds and the fixed navigation benchmark world.

use rand::Rng;
use tempofleet::control::{ControlParams, MotionSpec, Plant, SphereWorld, Transform};
use tempofleet::geom::{dist, Disk, Point};
use tempofleet::world::Friction;

/// Unit-scale workspace holding `n` disjoint obstacles that keep a margin
/// from each other and from the boundary.
pub fn random_world(rng: &mut impl Rng, n: usize) -> (Disk, Vec<Disk>) {
    let workspace = Disk::new([rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)], rng.random_range(2.0..10.0));
    let mut obstacles: Vec<Disk> = Vec::new();
    while obstacles.len() < n {
        let r = workspace.radius * rng.random_range(0.03..0.15);
        let c = random_point_in(rng, &Disk::new(workspace.center, workspace.radius - r - 0.05 * workspace.radius));
        let o = Disk::new(c, r);
        if obstacles.iter().all(|p| o.gap(p) > 0.05 * workspace.radius) {
            obstacles.push(o);
        }
    }
    (workspace, obstacles)
}

pub fn random_point_in(rng: &mut impl Rng, d: &Disk) -> Point {
    loop {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if p[0] * p[0] + p[1] * p[1] < 1.0 {
            return [d.center[0] + d.radius * p[0], d.center[1] + d.radius * p[1]];
        }
    }
}

/// Two-obstacle world for a single robot of radius 0.25 navigating to the
/// center of a goal region.
pub struct NavWorld {
    pub workspace: Disk,
    pub obstacles: Vec<Disk>,
    pub target: Disk,
    pub radius: f64,
}

pub fn nav_world() -> NavWorld {
    NavWorld {
        workspace: Disk::new([0.0, 0.0], 2.0),
        obstacles: vec![Disk::new([-0.8, 0.6], 0.25), Disk::new([0.9, 0.6], 0.2)],
        target: Disk::new([0.2, -0.1], 0.8),
        radius: 0.25,
    }
}

impl NavWorld {
    /// Clearance of a robot ball centered at `x`.
    pub fn clearance(&self, x: Point) -> f64 {
        let mut c = self.workspace.radius - dist(x, self.workspace.center) - self.radius;
        for o in &self.obstacles {
            c = c.min(dist(x, o.center) - o.radius - self.radius);
        }
        c
    }

    /// Uniform start whose ball is free by `margin` and lies outside the target.
    pub fn random_start(&self, rng: &mut impl Rng, margin: f64) -> Point {
        loop {
            let x = random_point_in(rng, &self.workspace);
            if self.clearance(x) > margin && dist(x, self.target.center) > self.target.radius + self.radius {
                return x;
            }
        }
    }

    pub fn spec(&self, start: Point, plant: Plant) -> MotionSpec {
        MotionSpec {
            workspace: self.workspace,
            obstacles: self.obstacles.clone(),
            radius: self.radius,
            start,
            goal: self.target.center,
            target: self.target,
            plant,
            load_sharing: vec![1.0],
        }
    }
}

/// Unit-mass robot with the default sinusoidal friction.
pub fn robot_plant() -> Plant {
    Plant::single(1.0, Friction::sinusoidal(1.25, 0.5))
}

/// Default gains with `τ` pinned to `r̄²`.
pub fn nav_params() -> ControlParams {
    let p = ControlParams::default();
    ControlParams { tau: Some(p.r_bar * p.r_bar), ..p }
}

/// Point of `world`'s free space at least `margin` from every boundary.
pub fn random_free_point(rng: &mut impl Rng, world: &SphereWorld, margin: f64) -> Point {
    loop {
        let x = random_point_in(rng, &world.boundary);
        if world.clearance(x) > margin && world.obstacles.iter().all(|o| dist(x, o.center) > o.radius + margin) {
            return x;
        }
    }
}

/// Largest round-trip error `‖H⁻¹(H(x)) − x‖` and largest relative error of
/// the Jacobian against central differences, over `n` random free points.
pub fn transform_errors(rng: &mut impl Rng, world: &SphereWorld, h: &Transform, n: usize) -> (f64, f64) {
    let step = 1e-6 * world.boundary.radius;
    let (mut round, mut jac) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let x = random_free_point(rng, world, 100.0 * step);
        let (chi, j) = h.forward(x).expect("free point maps");
        round = round.max(dist(h.inverse(chi).expect("image inverts"), x));
        let mut diff = 0.0;
        let mut size = 0.0;
        for k in 0..2 {
            let mut e = [0.0, 0.0];
            e[k] = step;
            let (plus, _) = h.forward([x[0] + e[0], x[1] + e[1]]).unwrap();
            let (minus, _) = h.forward([x[0] - e[0], x[1] - e[1]]).unwrap();
            for i in 0..2 {
                let fd = (plus[i] - minus[i]) / (2.0 * step);
                diff += (fd - j[i][k]).powi(2);
                size += j[i][k].powi(2);
            }
        }
        jac = jac.max((diff / size).sqrt());
    }
    (round, jac)
}
