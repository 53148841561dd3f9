//! Closed-loop simulation of one entity moving between regions.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{add, dist, norm, sub, Disk, Point};
use crate::world::Friction;

use super::law::{adaptation_rates, control_navigation, control_transport, reference_rate, reference_velocity, Gains};
use super::navfn::{goal_clearance, NavFn};
use super::transform::{SphereWorld, Transform};
use super::{ControlError, ControlParams};

/// Local error bound of one adaptive step, in meters.
const STEP_TOL: f64 = 1e-8;
/// Smallest step as a fraction of the nominal `dt`.
const MIN_STEP_RATIO: f64 = 1e-16;

/// True dynamics of an entity: `m ẍ + Σ f_k(x + d_k, ẋ) = u`. A coupled
/// object-robot entity lists the object's friction at offset zero and each
/// robot's friction at its grasp offset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plant {
    pub mass: f64,
    pub friction: Vec<(Friction, Point)>,
}

impl Plant {
    pub fn single(mass: f64, friction: Friction) -> Self {
        Plant {
            mass,
            friction: vec![(friction, [0.0, 0.0])],
        }
    }

    pub fn friction_force(&self, x: Point, v: Point) -> Point {
        self.friction
            .iter()
            .fold([0.0, 0.0], |acc, (f, d)| add(acc, f.force(add(x, *d), v)))
    }

    /// Constant `α` with `‖f(x, v)‖ ≤ α‖v‖`.
    pub fn friction_bound(&self) -> f64 {
        self.friction.iter().map(|(f, _)| f.bound()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimState {
    pub t: f64,
    pub x: Point,
    pub v: Point,
    pub m_hat: f64,
    pub alpha_hat: f64,
}

/// Control force and estimate rates at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub force: Point,
    pub m_hat_dot: f64,
    pub alpha_hat_dot: f64,
}

/// One classical Runge-Kutta step of position, velocity and both estimates,
/// with the control re-evaluated at every stage.
pub fn integrate_step<F>(s: &SimState, plant: &Plant, dt: f64, law: F) -> Result<SimState, ControlError>
where
    F: Fn(&SimState) -> Result<Rates, ControlError>,
{
    let deriv = |st: &SimState, law: &F| -> Result<[f64; 6], ControlError> {
        let r = law(st)?;
        let f = plant.friction_force(st.x, st.v);
        Ok([
            st.v[0],
            st.v[1],
            (r.force[0] - f[0]) / plant.mass,
            (r.force[1] - f[1]) / plant.mass,
            r.m_hat_dot,
            r.alpha_hat_dot,
        ])
    };
    let shift = |k: &[f64; 6], h: f64| SimState {
        t: s.t + h,
        x: [s.x[0] + h * k[0], s.x[1] + h * k[1]],
        v: [s.v[0] + h * k[2], s.v[1] + h * k[3]],
        m_hat: s.m_hat + h * k[4],
        alpha_hat: s.alpha_hat + h * k[5],
    };
    let k1 = deriv(s, &law)?;
    let k2 = deriv(&shift(&k1, dt / 2.0), &law)?;
    let k3 = deriv(&shift(&k2, dt / 2.0), &law)?;
    let k4 = deriv(&shift(&k3, dt), &law)?;
    let mut k = [0.0; 6];
    for i in 0..6 {
        k[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    let next = SimState { t: s.t + dt, ..shift(&k, dt) };
    let finite = next.x.iter().chain(&next.v).chain([&next.m_hat, &next.alpha_hat]).all(|v| v.is_finite());
    if !finite {
        return Err(ControlError::NonFinite(s.t));
    }
    Ok(next)
}

/// One motion: an entity of radius `radius` moves from `start` (at rest) to
/// `goal`, treating `obstacles` (static obstacles, frozen entities and
/// excluded regions, all unenlarged) as fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MotionSpec {
    pub workspace: Disk,
    pub obstacles: Vec<Disk>,
    pub radius: f64,
    pub start: Point,
    pub goal: Point,
    /// Region the entity ball must end inside.
    pub target: Disk,
    pub plant: Plant,
    /// One coefficient per robot applying force; `[1.0]` for a lone robot.
    pub load_sharing: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogRow {
    pub t: f64,
    pub x: Point,
    pub v: Point,
    pub u: Point,
    pub m_hat: f64,
    pub alpha_hat: f64,
    pub clearance: f64,
    pub e_v: f64,
    /// Per-robot forces, summing to `u`.
    pub forces: Vec<Point>,
}

/// Result of a successful motion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MotionLog {
    pub rows: Vec<LogRow>,
    pub final_state: SimState,
    pub final_e_v: f64,
    pub min_clearance: f64,
    pub max_m_hat: f64,
    pub max_alpha_hat: f64,
    /// `α̂` never decreased between steps.
    pub alpha_hat_monotone: bool,
    /// Effective `r̄` and `τ` of the navigation function.
    pub r_bar: f64,
    pub tau: f64,
}

impl MotionLog {
    pub fn duration(&self) -> f64 {
        self.final_state.t
    }

    pub fn path(&self) -> Vec<Point> {
        self.rows.iter().map(|r| r.x).collect()
    }

    /// CSV with columns `t,x,y,vx,vy,ux,uy,m_hat,alpha_hat,clearance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,vx,vy,ux,uy,m_hat,alpha_hat,clearance\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.t, r.x[0], r.x[1], r.v[0], r.v[1], r.u[0], r.u[1], r.m_hat, r.alpha_hat, r.clearance
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("motion setup failed: {0}")]
    Setup(#[from] ControlError),
    #[error("timeout at t = {t:.2} s, {distance:.4} m from the goal at speed {speed:.4} m/s")]
    Timeout {
        t: f64,
        distance: f64,
        speed: f64,
        max_m_hat: f64,
        max_alpha_hat: f64,
        alpha_hat_monotone: bool,
    },
    #[error("safety violation at t = {t:.4} s at ({:.4}, {:.4}), clearance {clearance:.3e}", x[0], x[1])]
    Safety { t: f64, x: Point, clearance: f64 },
    #[error("state diverged at t = {0:.4} s")]
    Diverged(f64),
}

/// Navigation controller for one motion.
pub struct Controller {
    pub world: SphereWorld,
    pub transform: Transform,
    pub navfn: NavFn,
    pub gains: Gains,
    pub fd_delta: f64,
    /// Clearance `r̄` actually used.
    pub r_bar: f64,
}

/// Everything the loop computes at one state.
#[derive(Clone, Copy, Debug)]
pub struct Signals {
    pub u: Point,
    pub e_v: Point,
    pub v_d: Point,
    pub vd_dot: Point,
    pub m_hat_dot: f64,
    pub alpha_hat_dot: f64,
}

impl Controller {
    /// Builds the point world for `spec`. `r̄` is reduced below the obstacle
    /// points' clearance when needed; an unset `τ` becomes `r̄²`, or stays
    /// just below the squared clearance of the goal or of the start when one
    /// of them is closer to an obstacle point. Starting outside every barrier
    /// keeps the initial force bounded.
    pub fn new(spec: &MotionSpec, p: &ControlParams) -> Result<Self, ControlError> {
        let world = SphereWorld::for_entity(spec.workspace, &spec.obstacles, spec.radius);
        for (what, x) in [("start", spec.start), ("goal", spec.goal)] {
            if !world.is_free(x) {
                return Err(ControlError::Geometry(format!(
                    "{what} ({:.3}, {:.3}) is not in the entity's free space",
                    x[0], x[1]
                )));
            }
        }
        let transform = Transform::new(&world, p.r_bar)?;
        let points = transform.points();
        let (chi_d, _) = transform.forward(spec.goal)?;
        let clearance = transform.point_clearance();
        let r_bar = if p.r_bar < clearance { p.r_bar } else { 0.99 * clearance };
        let (chi_s, _) = transform.forward(spec.start)?;
        let room = goal_clearance(&points, chi_d).min(goal_clearance(&points, chi_s));
        let tau = match p.tau {
            Some(t) => t,
            None if r_bar * r_bar < room => r_bar * r_bar,
            None => 0.99 * room,
        };
        if r_bar != p.r_bar || p.tau.is_none() && tau != r_bar * r_bar {
            log::debug!("navigation clearance reduced to r̄ = {r_bar:.4e}, τ = {tau:.4e}");
        }
        let navfn = NavFn::new(points, chi_d, p.k1, p.k2, tau, r_bar)?;
        Ok(Controller {
            world,
            transform,
            navfn,
            gains: Gains {
                k_phi: p.k_phi,
                k_v: p.k_v,
                k_m: p.k_m,
                k_alpha: p.k_alpha,
            },
            fd_delta: p.fd_delta,
            r_bar,
        })
    }

    pub fn signals(&self, s: &SimState) -> Result<Signals, ControlError> {
        let r = reference_velocity(&self.transform, &self.navfn, s.x)?;
        let vd_dot = reference_rate(&self.transform, &self.navfn, s.x, s.v, r.v_d, self.fd_delta)?;
        let u = control_navigation(&r, vd_dot, s.v, s.m_hat, s.alpha_hat, &self.gains);
        let e_v = sub(s.v, r.v_d);
        let (m_hat_dot, alpha_hat_dot) = adaptation_rates(e_v, vd_dot, &self.gains);
        Ok(Signals {
            u,
            e_v,
            v_d: r.v_d,
            vd_dot,
            m_hat_dot,
            alpha_hat_dot,
        })
    }
}

/// Runs the closed loop until the entity ball rests inside the target region
/// (speed and velocity error both below `arrival_speed`), the timeout
/// expires, or safety fails.
pub fn simulate_motion(spec: &MotionSpec, p: &ControlParams) -> Result<MotionLog, MotionError> {
    super::law::check_load_sharing(&spec.load_sharing)?;
    let ctl = Controller::new(spec, p)?;
    let alpha = spec.plant.friction_bound();
    if p.k_phi <= alpha / 2.0 {
        log::warn!("k_phi = {} does not exceed half the friction bound {alpha}; convergence is not guaranteed", p.k_phi);
    }
    let split = |u: Point| -> Result<(Point, Vec<Point>), ControlError> {
        let forces = control_transport(&spec.load_sharing, u)?;
        let total = forces.iter().fold([0.0, 0.0], |a, f| add(a, *f));
        Ok((total, forces))
    };
    let mut s = SimState {
        t: 0.0,
        x: spec.start,
        v: [0.0, 0.0],
        m_hat: p.m_hat0,
        alpha_hat: p.alpha_hat0,
    };
    let mut rows = Vec::new();
    let mut min_clearance = ctl.world.clearance(s.x);
    let (mut max_m, mut max_a) = (s.m_hat, s.alpha_hat);
    let mut monotone = true;
    let row = |s: &SimState, sig: &Signals, forces: Vec<Point>, clearance: f64| LogRow {
        t: s.t,
        x: s.x,
        v: s.v,
        u: forces.iter().fold([0.0, 0.0], |a, f| add(a, *f)),
        m_hat: s.m_hat,
        alpha_hat: s.alpha_hat,
        clearance,
        e_v: norm(sig.e_v),
        forces,
    };
    let mut step = 0usize;
    let mut h = p.dt;
    loop {
        let inside = spec.target.contains_ball(s.x, spec.radius) && norm(s.v) < p.arrival_speed;
        let out_of_time = s.t >= p.timeout;
        if inside || out_of_time || step.is_multiple_of(p.log_every) {
            let sig = ctl.signals(&s)?;
            // the robot must also have settled onto the reference, not just
            // slowed down while passing through
            let arrived = inside && norm(sig.e_v) < p.arrival_speed;
            if arrived || out_of_time || step.is_multiple_of(p.log_every) {
                let (_, forces) = split(sig.u)?;
                rows.push(row(&s, &sig, forces, ctl.world.clearance(s.x)));
            }
            if arrived {
                return Ok(MotionLog {
                    rows,
                    final_state: s,
                    final_e_v: norm(sig.e_v),
                    min_clearance,
                    max_m_hat: max_m,
                    max_alpha_hat: max_a,
                    alpha_hat_monotone: monotone,
                    r_bar: ctl.r_bar,
                    tau: ctl.navfn.tau,
                });
            }
            if out_of_time {
                return Err(MotionError::Timeout {
                    t: s.t,
                    distance: dist(s.x, spec.goal),
                    speed: norm(s.v),
                    max_m_hat: max_m,
                    max_alpha_hat: max_a,
                    alpha_hat_monotone: monotone,
                });
            }
        }
        let law = |st: &SimState| {
            let sig = ctl.signals(st)?;
            let (force, _) = split(sig.u)?;
            Ok(Rates {
                force,
                m_hat_dot: sig.m_hat_dot,
                alpha_hat_dot: sig.alpha_hat_dot,
            })
        };
        let clamp = |mut st: SimState| {
            st.m_hat = st.m_hat.clamp(0.0, p.m_cap);
            st.alpha_hat = st.alpha_hat.clamp(0.0, p.alpha_cap);
            st
        };
        // step doubling: one step of h against two of h/2; the finer result
        // is kept once they agree and stay in free space
        let next = loop {
            let full = integrate_step(&s, &spec.plant, h, law);
            let half = integrate_step(&s, &spec.plant, 0.5 * h, law)
                .and_then(|m| integrate_step(&clamp(m), &spec.plant, 0.5 * h, law));
            let err = match (&full, &half) {
                (Ok(a), Ok(b)) if ctl.world.is_free(b.x) => dist(a.x, b.x) + h * dist(a.v, b.v),
                _ => f64::INFINITY,
            };
            if err <= STEP_TOL || h <= p.dt * MIN_STEP_RATIO {
                if err < STEP_TOL / 64.0 {
                    h = (2.0 * h).min(p.dt);
                }
                break half;
            }
            h *= 0.5;
        };
        let next = match next {
            Ok(n) => clamp(n),
            Err(ControlError::NonFinite(t)) => return Err(MotionError::Diverged(t)),
            Err(ControlError::OutsideFreeSpace(_)) | Err(ControlError::BarrierDomain(_)) => {
                // even the smallest step left the free space; report where it began
                return Err(MotionError::Safety {
                    t: s.t,
                    x: s.x,
                    clearance: ctl.world.clearance(s.x),
                });
            }
            Err(e) => return Err(e.into()),
        };
        monotone &= next.alpha_hat >= s.alpha_hat;
        max_m = max_m.max(next.m_hat);
        max_a = max_a.max(next.alpha_hat);
        let clearance = ctl.world.clearance(next.x);
        min_clearance = min_clearance.min(clearance);
        if clearance <= 0.0 || !ctl.world.is_free(next.x) {
            return Err(MotionError::Safety {
                t: next.t,
                x: next.x,
                clearance,
            });
        }
        s = next;
        step += 1;
    }
}

/// Minimal SVG of a sphere world: workspace, obstacles and regions as
/// circles, paths as polylines.
pub fn svg_plot(workspace: Disk, obstacles: &[Disk], regions: &[Disk], paths: &[Vec<Point>]) -> String {
    let pad = workspace.radius * 0.05;
    let (x0, y0) = (workspace.center[0] - workspace.radius - pad, -(workspace.center[1] + workspace.radius + pad));
    let size = 2.0 * (workspace.radius + pad);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {size} {size}" width="800" height="800">"#
    );
    let stroke = workspace.radius / 300.0;
    let circle = |out: &mut String, d: &Disk, fill: &str| {
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" stroke="black" stroke-width="{stroke}"/>"#,
            d.center[0], -d.center[1], d.radius
        );
    };
    circle(&mut out, &workspace, "white");
    for o in obstacles {
        circle(&mut out, o, "gray");
    }
    for r in regions {
        circle(&mut out, r, "lightblue");
    }
    let colors = ["red", "green", "blue", "orange", "purple", "brown"];
    for (i, path) in paths.iter().enumerate() {
        let pts: Vec<String> = path.iter().map(|p| format!("{},{}", p[0], -p[1])).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            pts.join(" "),
            colors[i % colors.len()],
            2.0 * stroke
        );
    }
    out.push_str("</svg>\n");
    out
}
