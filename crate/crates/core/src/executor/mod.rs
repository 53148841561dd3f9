//! Runs discrete plans through the continuous layer, one moving entity at a
//! time, and checks the resulting behaviors against the task.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{simulate_motion, ControlParams, MotionError, MotionLog, MotionSpec, Plant, SphereWorld};
use crate::geom::{add, dist, norm, scale, sub, Disk, Point};
use crate::ltl::{eval_lasso, Formula, LassoWord, Letter};
use crate::product::PrefixSuffixPlan;
use crate::ts::{Action, TsState, TsTransition};
use crate::world::{members, Coalition, EntityKind, Scenario};

/// Smallest clearance accepted when seating an entity, in meters.
const MIN_GAP: f64 = 1e-3;
/// Clearance beyond which seating prefers room over distance, in meters.
const SEAT_GAP: f64 = 0.05;
const RINGS: usize = 32;
const ROOM_RINGS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("step {step}: no placement for {entity}: {detail}")]
    Placement { step: usize, entity: String, detail: String },
    #[error("step {step}: motion of {entity} failed: {error}")]
    Motion { step: usize, entity: String, error: MotionError },
    #[error("step {step}: continuous state does not match the plan: {detail}")]
    Inconsistent { step: usize, detail: String },
    #[error("plan has an empty suffix")]
    EmptySuffix,
}

/// Continuous configuration between motions. Robots that hold an object keep
/// a fixed offset from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub robots: Vec<Point>,
    pub objects: Vec<Point>,
    pub grasp: Vec<Coalition>,
}

/// Candidate centers inside `inner`: its center and points on concentric
/// rings.
fn candidates(inner: Disk, rings: usize) -> Vec<Point> {
    let mut out = vec![inner.center];
    for ring in 1..=rings {
        let rho = inner.radius * ring as f64 / rings as f64;
        let n = 8.max(6 * ring);
        out.extend((0..n).map(|a| {
            let th = TAU * a as f64 / n as f64;
            add(inner.center, [rho * th.cos(), rho * th.sin()])
        }));
    }
    out
}

/// Radius of the largest empty disk left inside `region` by `balls`,
/// estimated on a ring grid.
fn room_left(region: Disk, balls: &[Disk], grid: &[Point]) -> f64 {
    grid.iter()
        .map(|&q| {
            balls
                .iter()
                .map(|b| dist(q, b.center) - b.radius)
                .fold(region.radius - dist(q, region.center), f64::min)
        })
        .fold(0.0, f64::max)
}

/// Seat for a ball of radius `r` in `region`. Its center must keep a
/// positive clearance from `forbidden` (disks already grown by `r`). Among
/// feasible spots the one leaving the most room for later arrivals wins,
/// with a small bonus for clearance up to [`SEAT_GAP`].
fn seat(region: Disk, r: f64, occupants: &[Disk], forbidden: &[Disk]) -> Option<Point> {
    let inner = shrink(region, r);
    if inner.radius < 0.0 {
        return None;
    }
    let grid = candidates(region, ROOM_RINGS);
    let mut balls = occupants.to_vec();
    balls.push(Disk::new(inner.center, r));
    let mut best: Option<(f64, Point)> = None;
    for p in candidates(inner, RINGS) {
        let clearance = forbidden
            .iter()
            .map(|b| dist(p, b.center) - b.radius)
            .fold(inner.radius - dist(p, inner.center), f64::min);
        if clearance <= MIN_GAP {
            continue;
        }
        *balls.last_mut().expect("pushed above") = Disk::new(p, r);
        let score = room_left(region, &balls, &grid) + 0.1 * clearance.min(SEAT_GAP);
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, p));
        }
    }
    best.map(|(_, p)| p)
}

fn shrink(d: Disk, r: f64) -> Disk {
    Disk::new(d.center, d.radius - r)
}

fn grow(d: Disk, r: f64) -> Disk {
    Disk::new(d.center, d.radius + r)
}

/// Human-readable entity name with 1-based indices.
pub fn entity_name(kind: EntityKind, grasp: &[Coalition]) -> String {
    match kind {
        EntityKind::Robot(i) => format!("robot {}", i + 1),
        EntityKind::Object(j) => format!("object {}", j + 1),
        EntityKind::Coupled(j) => {
            let m: Vec<String> = members(grasp[j]).map(|i| (i + 1).to_string()).collect();
            format!("object {} with robots {{{}}}", j + 1, m.join(","))
        }
    }
}

impl Placement {
    /// Initial seating: in every region, occupants (robots, then objects) are
    /// seated one at a time at the most open spot.
    pub fn initial(s: &Scenario) -> Result<Self, ExecError> {
        let mut p = Placement {
            robots: vec![[0.0; 2]; s.num_robots()],
            objects: vec![[0.0; 2]; s.num_objects()],
            grasp: vec![0; s.num_objects()],
        };
        let (rr, orr) = (s.init_robot_regions(), s.init_object_regions());
        for k in 0..s.num_regions() {
            let region = s.regions[k].disk();
            let mut placed: Vec<Disk> = Vec::new();
            let occupants = (0..s.num_robots())
                .filter(|&i| rr[i] == k)
                .map(|i| (EntityKind::Robot(i), s.robots[i].radius))
                .chain((0..s.num_objects()).filter(|&j| orr[j] == k).map(|j| (EntityKind::Object(j), s.objects[j].radius)));
            for (kind, r) in occupants {
                let blockers: Vec<Disk> = placed.iter().map(|d| grow(*d, r)).collect();
                let at = seat(region, r, &placed, &blockers).ok_or_else(|| ExecError::Placement {
                    step: 0,
                    entity: entity_name(kind, &p.grasp),
                    detail: format!("region {} is too crowded", s.regions[k].id),
                })?;
                match kind {
                    EntityKind::Robot(i) => p.robots[i] = at,
                    _ => p.objects[kind_object(kind)] = at,
                }
                placed.push(Disk::new(at, r));
            }
        }
        Ok(p)
    }

    /// Ball of every entity of the current grasp configuration.
    pub fn balls(&self, s: &Scenario) -> Vec<(EntityKind, Disk)> {
        s.entities(&self.grasp)
            .into_iter()
            .map(|e| (e.kind, Disk::new(self.center(e.kind), e.radius)))
            .collect()
    }

    pub fn center(&self, kind: EntityKind) -> Point {
        match kind {
            EntityKind::Robot(i) => self.robots[i],
            EntityKind::Object(j) | EntityKind::Coupled(j) => self.objects[j],
        }
    }

    fn radius(&self, s: &Scenario, kind: EntityKind) -> f64 {
        match kind {
            EntityKind::Robot(i) => s.robots[i].radius,
            EntityKind::Object(j) => s.objects[j].radius,
            EntityKind::Coupled(j) => s.coupled_radius(j, self.grasp[j]),
        }
    }

    /// Moves an entity; robots holding a moved object move with it.
    fn move_entity(&mut self, kind: EntityKind, to: Point) {
        match kind {
            EntityKind::Robot(i) => self.robots[i] = to,
            EntityKind::Object(j) | EntityKind::Coupled(j) => {
                let shift = sub(to, self.objects[j]);
                self.objects[j] = to;
                for i in members(self.grasp[j]) {
                    self.robots[i] = add(self.robots[i], shift);
                }
            }
        }
    }

    /// Region whose disk contains the ball, if any.
    pub fn region_of(s: &Scenario, center: Point, radius: f64) -> Option<usize> {
        s.regions.iter().position(|r| r.disk().contains_ball(center, radius))
    }

    /// Discrete state read off the geometry, or the first entity that is not
    /// inside a region.
    pub fn observe(&self, s: &Scenario) -> Result<TsState, String> {
        let robots = (0..s.num_robots())
            .map(|i| Self::region_of(s, self.robots[i], s.robots[i].radius).map(|k| k as u8).ok_or(format!("robot {} is outside every region", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let objects = (0..s.num_objects())
            .map(|j| Self::region_of(s, self.objects[j], s.objects[j].radius).map(|k| k as u8).ok_or(format!("object {} is outside every region", j + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TsState { robots, objects, grasp: self.grasp.clone() })
    }

    /// Balls of all entities except `skip`, enlarged by `r`, in region `k`.
    fn blockers_in(&self, s: &Scenario, k: usize, skip: &[EntityKind], r: f64) -> Vec<Disk> {
        self.balls(s)
            .into_iter()
            .filter(|(kind, d)| !skip.contains(kind) && s.regions[k].disk().contains_ball(d.center, d.radius - 1e-9))
            .map(|(_, d)| grow(d, r))
            .collect()
    }

    fn entity_region(&self, s: &Scenario, kind: EntityKind) -> Option<usize> {
        Self::region_of(s, self.center(kind), self.radius(s, kind))
    }

    /// Moves `kind` to the most open spot of its region if its ball leaves
    /// the region or touches another entity.
    fn reseat_if_needed(&mut self, s: &Scenario, kind: EntityKind, k: usize, step: usize) -> Result<(), ExecError> {
        let r = self.radius(s, kind);
        let c = self.center(kind);
        let occupants = self.blockers_in(s, k, &[kind], 0.0);
        let blockers: Vec<Disk> = occupants.iter().map(|d| grow(*d, r)).collect();
        let inside = s.regions[k].disk().contains_ball(c, r);
        if inside && blockers.iter().all(|b| dist(c, b.center) - b.radius > MIN_GAP) {
            return Ok(());
        }
        let at = seat(s.regions[k].disk(), r, &occupants, &blockers).ok_or_else(|| ExecError::Placement {
            step,
            entity: entity_name(kind, &self.grasp),
            detail: format!("no room in region {}", s.regions[k].id),
        })?;
        self.move_entity(kind, at);
        Ok(())
    }

    fn grasp(&mut self, s: &Scenario, robot: usize, object: usize, step: usize) -> Result<(), ExecError> {
        let k = self
            .entity_region(s, EntityKind::Robot(robot))
            .ok_or_else(|| ExecError::Inconsistent { step, detail: format!("robot {} is outside every region", robot + 1) })?;
        let o = self.objects[object];
        let toward = sub(self.robots[robot], o);
        let base = if norm(toward) > 0.0 { toward[1].atan2(toward[0]) } else { 0.0 };
        self.grasp[object] |= 1 << robot;
        let team: Vec<usize> = members(self.grasp[object]).collect();
        for (n, &i) in team.iter().enumerate() {
            let th = base + TAU * n as f64 / team.len() as f64;
            let reach = s.objects[object].radius + s.robots[i].radius;
            self.robots[i] = add(o, scale([th.cos(), th.sin()], reach));
        }
        self.reseat_if_needed(s, EntityKind::Coupled(object), k, step)
    }

    fn release(&mut self, s: &Scenario, robot: usize, object: usize, step: usize) -> Result<(), ExecError> {
        let k = self
            .entity_region(s, EntityKind::Coupled(object))
            .ok_or_else(|| ExecError::Inconsistent { step, detail: format!("object {} is outside every region", object + 1) })?;
        self.grasp[object] &= !(1 << robot);
        self.reseat_if_needed(s, EntityKind::Robot(robot), k, step)
    }
}

/// `object 1 with robots {1,2}` becomes `object-1-with-robots-1-2`.
fn slug(name: &str) -> String {
    name.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

fn kind_object(kind: EntityKind) -> usize {
    match kind {
        EntityKind::Object(j) | EntityKind::Coupled(j) => j,
        EntityKind::Robot(_) => unreachable!("robots have no object index"),
    }
}

/// Motion of one entity between two regions with everything else frozen.
fn motion_spec(p: &Placement, s: &Scenario, kind: EntityKind, from: usize, to: usize) -> Result<MotionSpec, String> {
    let r = p.radius(s, kind);
    let mut obstacles = s.obstacles.clone();
    obstacles.extend(
        s.regions
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != from && k != to)
            .map(|(_, reg)| reg.disk()),
    );
    for k in [from, to] {
        obstacles.extend(p.blockers_in(s, k, &[kind], 0.0));
    }
    let world = SphereWorld::for_entity(s.workspace, &obstacles, r);
    let start = p.center(kind);
    if !world.is_free(start) {
        return Err("start is enclosed by neighbouring entities".into());
    }
    let occupants = p.blockers_in(s, to, &[kind], 0.0);
    let goal = seat(s.regions[to].disk(), r, &occupants, &world.obstacles).ok_or("no free goal in the target region")?;
    let (plant, load_sharing) = match kind {
        EntityKind::Robot(i) => (Plant::single(s.robots[i].mass, s.robots[i].friction.clone()), vec![1.0]),
        EntityKind::Object(j) | EntityKind::Coupled(j) => {
            let team: Vec<usize> = members(p.grasp[j]).collect();
            let mut friction = vec![(s.objects[j].friction.clone(), [0.0, 0.0])];
            friction.extend(team.iter().map(|&i| (s.robots[i].friction.clone(), sub(p.robots[i], p.objects[j]))));
            let mass = s.objects[j].mass + team.iter().map(|&i| s.robots[i].mass).sum::<f64>();
            let cf = match &s.control.load_sharing {
                Some(cf) if cf.len() == team.len() => cf.clone(),
                _ => vec![1.0 / team.len().max(1) as f64; team.len()],
            };
            (Plant { mass, friction }, cf)
        }
    };
    Ok(MotionSpec {
        workspace: s.workspace,
        obstacles,
        radius: r,
        start,
        goal,
        target: s.regions[to].disk(),
        plant,
        load_sharing,
    })
}

fn motion_of(a: &Action) -> Option<(EntityKind, usize, usize)> {
    match *a {
        Action::Navigate { robot, from, to } => Some((EntityKind::Robot(robot), from, to)),
        Action::Transport { object, from, to, .. } => Some((EntityKind::Coupled(object), from, to)),
        _ => None,
    }
}

fn apply_event(p: &mut Placement, s: &Scenario, a: &Action, step: usize) -> Result<(), ExecError> {
    match *a {
        Action::Grasp { robot, object } => p.grasp(s, robot, object, step),
        Action::Release { robot, object } => p.release(s, robot, object, step),
        _ => Ok(()),
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("a larger element exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Orders the atoms of a transition: releases, then motions one entity at a
/// time, then grasps. Motions go in ascending robot order unless a goal or
/// start placement fails, in which case later orders are tried.
pub fn serialize_transition(t: &TsTransition, s: &Scenario, placement: &Placement) -> Result<Vec<Action>, ExecError> {
    serialize_at(t, s, placement, 0)
}

fn serialize_at(t: &TsTransition, s: &Scenario, placement: &Placement, step: usize) -> Result<Vec<Action>, ExecError> {
    let mut releases: Vec<Action> = t.actions.iter().filter(|a| matches!(a, Action::Release { .. })).cloned().collect();
    let mut grasps: Vec<Action> = t.actions.iter().filter(|a| matches!(a, Action::Grasp { .. })).cloned().collect();
    let mut motions: Vec<Action> = t.actions.iter().filter(|a| motion_of(a).is_some()).cloned().collect();
    releases.sort();
    grasps.sort();
    motions.sort_by_key(Action::lead_robot);
    let mut order: Vec<usize> = (0..motions.len()).collect();
    let mut last_error: String;
    loop {
        let attempt = (|| -> Result<(), String> {
            let mut p = placement.clone();
            for a in &releases {
                apply_event(&mut p, s, a, step).map_err(|e| e.to_string())?;
            }
            for &m in &order {
                let (kind, from, to) = motion_of(&motions[m]).expect("filtered to motions");
                let spec = motion_spec(&p, s, kind, from, to).map_err(|e| format!("{}: {e}", entity_name(kind, &p.grasp)))?;
                p.move_entity(kind, spec.goal);
            }
            for a in &grasps {
                apply_event(&mut p, s, a, step).map_err(|e| e.to_string())?;
            }
            Ok(())
        })();
        match attempt {
            Ok(()) => {
                let mut out = releases;
                out.extend(order.iter().map(|&m| motions[m].clone()));
                out.extend(grasps);
                return Ok(out);
            }
            Err(e) => last_error = e,
        }
        if !next_permutation(&mut order) {
            return Err(ExecError::Placement {
                step,
                entity: "transition".into(),
                detail: format!("no feasible motion order ({last_error})"),
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecOptions {
    /// Number of times the suffix is executed.
    pub suffix_reps: usize,
    pub params: ControlParams,
}

impl ExecOptions {
    pub fn for_scenario(s: &Scenario) -> Self {
        ExecOptions {
            suffix_reps: 2,
            params: s.control.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSummary {
    pub entity: String,
    pub from: String,
    pub to: String,
    pub start: Point,
    pub goal: Point,
    pub end: Point,
    pub started_at: f64,
    pub duration: f64,
    pub min_clearance: f64,
    pub final_e_v: f64,
    pub max_m_hat: f64,
    pub max_alpha_hat: f64,
    pub alpha_hat_monotone: bool,
    pub r_bar: f64,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    /// `prefix` or `suffix lap n`.
    pub phase: String,
    pub actions: String,
    /// Serialized atoms in execution order.
    pub order: Vec<String>,
    pub motions: Vec<MotionSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorPoint {
    pub t: f64,
    pub x: Point,
    pub services: Vec<String>,
}

/// Timed positions and services of every robot and object, recorded at the
/// start and at each arrival.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Behavior {
    pub robots: Vec<Vec<BehaviorPoint>>,
    pub objects: Vec<Vec<BehaviorPoint>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub steps: Vec<StepReport>,
    /// Discrete state read from the geometry before the first and after every
    /// executed transition.
    pub observations: Vec<TsState>,
    /// Simulated time of each observation.
    pub times: Vec<f64>,
    pub behavior: Behavior,
    pub prefix_len: usize,
    pub suffix_len: usize,
    pub laps: usize,
    pub min_clearance: f64,
    /// `(label, log)` per motion, in execution order.
    #[serde(skip)]
    pub logs: Vec<(String, MotionLog)>,
}

impl ExecutionReport {
    pub fn total_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn motions(&self) -> impl Iterator<Item = &MotionSummary> {
        self.steps.iter().flat_map(|s| &s.motions)
    }
}

fn record(b: &mut Behavior, p: &Placement, s: &Scenario, t: f64, robots: &[usize], objects: &[usize]) {
    for &i in robots {
        let services = Placement::region_of(s, p.robots[i], s.robots[i].radius)
            .map(|k| s.robot_services(i, k).to_vec())
            .unwrap_or_default();
        b.robots[i].push(BehaviorPoint { t, x: p.robots[i], services });
    }
    for &j in objects {
        let services = Placement::region_of(s, p.objects[j], s.objects[j].radius)
            .map(|k| s.object_services(j, k).to_vec())
            .unwrap_or_default();
        b.objects[j].push(BehaviorPoint { t, x: p.objects[j], services });
    }
}

/// Executes the prefix once and the suffix `suffix_reps` times. Grasps and
/// releases are instantaneous; motions run one at a time with every other
/// entity frozen.
pub fn execute_plan(plan: &PrefixSuffixPlan, s: &Scenario, opts: &ExecOptions) -> Result<ExecutionReport, ExecError> {
    if plan.suffix.is_empty() {
        return Err(ExecError::EmptySuffix);
    }
    let mut p = Placement::initial(s)?;
    let mut report = ExecutionReport {
        steps: Vec::new(),
        observations: Vec::new(),
        times: Vec::new(),
        behavior: Behavior {
            robots: vec![Vec::new(); s.num_robots()],
            objects: vec![Vec::new(); s.num_objects()],
        },
        prefix_len: plan.prefix.len(),
        suffix_len: plan.suffix.len(),
        laps: opts.suffix_reps,
        min_clearance: f64::INFINITY,
        logs: Vec::new(),
    };
    let all_robots: Vec<usize> = (0..s.num_robots()).collect();
    let all_objects: Vec<usize> = (0..s.num_objects()).collect();
    record(&mut report.behavior, &p, s, 0.0, &all_robots, &all_objects);
    let observe = |p: &Placement, step: usize| p.observe(s).map_err(|detail| ExecError::Inconsistent { step, detail });
    report.observations.push(observe(&p, 0)?);
    report.times.push(0.0);
    let mut t = 0.0;
    let schedule = plan
        .prefix
        .iter()
        .map(|tr| ("prefix".to_string(), tr))
        .chain((1..=opts.suffix_reps).flat_map(|lap| plan.suffix.iter().map(move |tr| (format!("suffix lap {lap}"), tr))));
    for (step, (phase, tr)) in schedule.enumerate() {
        let seen = report.observations.last().expect("initial observation");
        if *seen != tr.source {
            return Err(ExecError::Inconsistent {
                step,
                detail: "observed state differs from the transition source".into(),
            });
        }
        let events = serialize_at(tr, s, &p, step)?;
        let mut summary = StepReport {
            index: step,
            phase,
            actions: crate::ts::format_actions(&tr.actions, s),
            order: events.iter().map(|a| a.display(s).to_string()).collect(),
            motions: Vec::new(),
        };
        for a in &events {
            let Some((kind, from, to)) = motion_of(a) else {
                apply_event(&mut p, s, a, step)?;
                continue;
            };
            let name = entity_name(kind, &p.grasp);
            let spec = motion_spec(&p, s, kind, from, to).map_err(|detail| ExecError::Placement {
                step,
                entity: name.clone(),
                detail,
            })?;
            let log = simulate_motion(&spec, &opts.params).map_err(|error| ExecError::Motion {
                step,
                entity: name.clone(),
                error,
            })?;
            p.move_entity(kind, log.final_state.x);
            let started_at = t;
            t += log.duration();
            report.min_clearance = report.min_clearance.min(log.min_clearance);
            let (robots, objects): (Vec<usize>, Vec<usize>) = match kind {
                EntityKind::Robot(i) => (vec![i], vec![]),
                EntityKind::Object(j) | EntityKind::Coupled(j) => (members(p.grasp[j]).collect(), vec![j]),
            };
            record(&mut report.behavior, &p, s, t, &robots, &objects);
            summary.motions.push(MotionSummary {
                entity: name.clone(),
                from: s.regions[from].id.clone(),
                to: s.regions[to].id.clone(),
                start: spec.start,
                goal: spec.goal,
                end: log.final_state.x,
                started_at,
                duration: log.duration(),
                min_clearance: log.min_clearance,
                final_e_v: log.final_e_v,
                max_m_hat: log.max_m_hat,
                max_alpha_hat: log.max_alpha_hat,
                alpha_hat_monotone: log.alpha_hat_monotone,
                r_bar: log.r_bar,
                tau: log.tau,
            });
            report.logs.push((format!("step{step:03}-{}", slug(&name)), log));
        }
        let now = observe(&p, step)?;
        if now != tr.target {
            return Err(ExecError::Inconsistent {
                step,
                detail: "observed state differs from the transition target".into(),
            });
        }
        report.observations.push(now);
        report.times.push(t);
        report.steps.push(summary);
    }
    Ok(report)
}

/// Formulas checked against a behavior: an optional global formula plus
/// per-robot and per-object formulas over their own services.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Task {
    pub global: Option<Formula>,
    pub robots: Vec<(usize, Formula)>,
    pub objects: Vec<(usize, Formula)>,
}

impl Task {
    pub fn global(f: Formula) -> Self {
        Task {
            global: Some(f),
            ..Default::default()
        }
    }

    /// `φ = global ∧ (∧φ_i) ∧ (∧φ^o_j)`.
    pub fn conjunction(&self) -> Formula {
        Formula::conjunction(
            self.global
                .iter()
                .cloned()
                .chain(self.robots.iter().map(|(_, f)| f.clone()))
                .chain(self.objects.iter().map(|(_, f)| f.clone())),
        )
    }
}

/// Lasso of letters extracted from the observations, or `None` when the laps
/// disagree or the last lap does not close the cycle.
fn observed_lasso(report: &ExecutionReport, letter: impl Fn(&TsState) -> Letter) -> Option<LassoWord> {
    let (p, c, laps) = (report.prefix_len, report.suffix_len, report.laps);
    if c == 0 || laps == 0 || report.observations.len() != p + laps * c + 1 {
        return None;
    }
    let obs = &report.observations;
    for lap in 1..laps {
        if obs[p + lap * c..p + (lap + 1) * c] != obs[p..p + c] {
            return None;
        }
    }
    if obs[p + laps * c] != obs[p] {
        return None;
    }
    Some(LassoWord::new(obs[..p].iter().map(&letter).collect(), obs[p..p + c].iter().map(&letter).collect()))
}

/// Checks the executed behavior: each per-entity formula on that entity's
/// service word and the conjunction of all formulas on the joint word. The
/// words come from the regions the entity balls were observed in.
pub fn verify_behavior(report: &ExecutionReport, s: &Scenario, task: &Task) -> bool {
    let joint = observed_lasso(report, |st| st.label_set(s));
    let Some(joint) = joint else {
        return false;
    };
    if !eval_lasso(&task.conjunction(), &joint) {
        return false;
    }
    let robots_ok = task.robots.iter().all(|(i, f)| {
        observed_lasso(report, |st| s.robot_services(*i, st.robots[*i] as usize).iter().cloned().collect::<BTreeSet<_>>())
            .is_some_and(|w| eval_lasso(f, &w))
    });
    let objects_ok = task.objects.iter().all(|(j, f)| {
        observed_lasso(report, |st| s.object_services(*j, st.objects[*j] as usize).iter().cloned().collect::<BTreeSet<_>>())
            .is_some_and(|w| eval_lasso(f, &w))
    });
    robots_ok && objects_ok
}
