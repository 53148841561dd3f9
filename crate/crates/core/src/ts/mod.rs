//! Coupled transition system over robot regions, object regions and grasp
//! configurations.

mod build;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::dist;
use crate::world::{members, Coalition, Scenario};

pub use build::{build_ts, Ts, TsEdge, TsError};

/// Extra cost per grasp or release so that otherwise equal plans are ordered
/// by the number of grasp-status changes.
pub const GRASP_COST: f64 = 1e-6;

/// Discrete system state. Region and robot indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TsState {
    pub robots: Vec<u8>,
    pub objects: Vec<u8>,
    /// `grasp[j]`: robots holding object `j`.
    pub grasp: Vec<Coalition>,
}

impl TsState {
    pub fn initial(s: &Scenario) -> TsState {
        TsState {
            robots: s.init_robot_regions().iter().map(|&k| k as u8).collect(),
            objects: s.init_object_regions().iter().map(|&k| k as u8).collect(),
            grasp: vec![0; s.num_objects()],
        }
    }

    pub fn robot_regions(&self) -> Vec<usize> {
        self.robots.iter().map(|&k| k as usize).collect()
    }

    pub fn object_regions(&self) -> Vec<usize> {
        self.objects.iter().map(|&k| k as usize).collect()
    }

    /// Object held by robot `i`, if any.
    pub fn held_by(&self, i: usize) -> Option<usize> {
        self.grasp.iter().position(|c| c >> i & 1 == 1)
    }

    /// Atoms of `L(s)`, possibly repeated.
    pub fn label<'a>(&'a self, s: &'a Scenario) -> impl Iterator<Item = &'a str> + 'a {
        let robots = self.robots.iter().enumerate().flat_map(move |(i, &k)| s.robot_services(i, k as usize));
        let objects = self.objects.iter().enumerate().flat_map(move |(j, &k)| s.object_services(j, k as usize));
        robots.chain(objects).map(String::as_str)
    }

    pub fn label_set(&self, s: &Scenario) -> crate::ltl::Letter {
        self.label(s).map(str::to_string).collect()
    }
}

/// One synchronized action. Every robot takes part in exactly one action of a
/// transition; the members of a transport coalition share one atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Stay { robot: usize },
    Navigate { robot: usize, from: usize, to: usize },
    Transport { object: usize, coalition: Coalition, from: usize, to: usize },
    Grasp { robot: usize, object: usize },
    Release { robot: usize, object: usize },
}

impl Action {
    /// Smallest robot index involved; used to order action sets.
    pub fn lead_robot(&self) -> usize {
        match *self {
            Action::Stay { robot }
            | Action::Navigate { robot, .. }
            | Action::Grasp { robot, .. }
            | Action::Release { robot, .. } => robot,
            Action::Transport { coalition, .. } => coalition.trailing_zeros() as usize,
        }
    }

    pub fn is_stay(&self) -> bool {
        matches!(self, Action::Stay { .. })
    }

    /// Renders with 1-based numbers and region ids, e.g. `π1 ->3 π4`,
    /// `π1 -T{1,3},2-> π4`, `1 -g-> 2`.
    pub fn display<'a>(&'a self, s: &'a Scenario) -> impl fmt::Display + 'a {
        ActionDisplay(self, s)
    }
}

struct ActionDisplay<'a>(&'a Action, &'a Scenario);

impl fmt::Display for ActionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let region = |k: usize| &self.1.regions[k].id;
        match *self.0 {
            Action::Stay { robot } => write!(f, "{} stays", robot + 1),
            Action::Navigate { robot, from, to } => {
                write!(f, "{} ->{} {}", region(from), robot + 1, region(to))
            }
            Action::Transport { object, coalition, from, to } => {
                let c: Vec<String> = members(coalition).map(|i| (i + 1).to_string()).collect();
                write!(f, "{} -T{{{}}},{}-> {}", region(from), c.join(","), object + 1, region(to))
            }
            Action::Grasp { robot, object } => write!(f, "{} -g-> {}", robot + 1, object + 1),
            Action::Release { robot, object } => write!(f, "{} -r-> {}", robot + 1, object + 1),
        }
    }
}

/// Renders the non-stay actions of a set, or `-` when everybody stays.
pub fn format_actions(actions: &[Action], s: &Scenario) -> String {
    let parts: Vec<String> = actions
        .iter()
        .filter(|a| !a.is_stay())
        .map(|a| a.display(s).to_string())
        .collect();
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(", ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsTransition {
    pub source: TsState,
    pub target: TsState,
    /// Sorted by lead robot.
    pub actions: Vec<Action>,
    pub cost: f64,
}

/// Both validity clauses: grasping robots share their object's region, each
/// robot holds at most one object, and every region's entities pack.
pub fn state_valid(st: &TsState, s: &Scenario) -> bool {
    let n = s.num_robots();
    let (k, m) = (s.num_regions(), s.num_objects());
    if st.robots.len() != n || st.objects.len() != m || st.grasp.len() != m {
        return false;
    }
    if st.robots.iter().chain(&st.objects).any(|&r| r as usize >= k) {
        return false;
    }
    let mut seen: Coalition = 0;
    for (j, &c) in st.grasp.iter().enumerate() {
        if c & seen != 0 || (n < 32 && c >> n != 0) {
            return false;
        }
        seen |= c;
        if members(c).any(|i| st.robots[i] != st.objects[j]) {
            return false;
        }
    }
    (0..k).all(|region| s.fits(region, &region_radii(st, s, region)))
}

/// Radii of the entities located in `region`.
pub fn region_radii(st: &TsState, s: &Scenario, region: usize) -> Vec<f64> {
    let held: Coalition = st.grasp.iter().fold(0, |a, c| a | c);
    let mut radii: Vec<f64> = (0..st.robots.len())
        .filter(|&i| held >> i & 1 == 0 && st.robots[i] as usize == region)
        .map(|i| s.robots[i].radius)
        .collect();
    for (j, &c) in st.grasp.iter().enumerate() {
        if st.objects[j] as usize != region {
            continue;
        }
        radii.push(if c == 0 {
            s.objects[j].radius
        } else {
            s.coupled_radius(j, c)
        });
    }
    radii
}

/// Cost of an action set: Euclidean distance between region centers for every
/// moving entity plus [`GRASP_COST`] per grasp or release.
pub fn transition_cost(actions: &[Action], s: &Scenario) -> f64 {
    let centers = |a: usize, b: usize| dist(s.regions[a].center, s.regions[b].center);
    actions
        .iter()
        .map(|a| match *a {
            Action::Stay { .. } => 0.0,
            Action::Navigate { from, to, .. } | Action::Transport { from, to, .. } => centers(from, to),
            Action::Grasp { .. } | Action::Release { .. } => GRASP_COST,
        })
        .sum()
}

/// Applies an action set; the caller guarantees it is legal at `st`.
pub fn apply(st: &TsState, actions: &[Action]) -> TsState {
    let mut next = st.clone();
    for a in actions {
        match *a {
            Action::Stay { .. } => {}
            Action::Navigate { robot, to, .. } => next.robots[robot] = to as u8,
            Action::Transport { object, coalition, to, .. } => {
                next.objects[object] = to as u8;
                for i in members(coalition) {
                    next.robots[i] = to as u8;
                }
            }
            Action::Grasp { robot, object } => next.grasp[object] |= 1 << robot,
            Action::Release { robot, object } => next.grasp[object] &= !(1 << robot),
        }
    }
    next
}

/// Every transition leaving a valid state, in a deterministic order.
///
/// Each object with a nonempty, sufficiently powerful coalition may be moved
/// by exactly that coalition; every other robot independently stays,
/// navigates (when free), grasps a co-located object that is not being moved
/// (when free) or releases its object (when grasping). Targets that fail
/// packing are dropped. The all-stay self-loop is always first.
pub fn successors(st: &TsState, s: &Scenario) -> Vec<TsTransition> {
    let n = s.num_robots();
    let k = s.num_regions();
    // Transport options per object: None or a destination region.
    let mut transport_opts: Vec<Vec<Option<usize>>> = Vec::with_capacity(st.grasp.len());
    for (j, &c) in st.grasp.iter().enumerate() {
        let mut opts = vec![None];
        if c != 0 && s.lambda(j, c) {
            opts.extend((0..k).filter(|&r| r != st.objects[j] as usize).map(Some));
        }
        transport_opts.push(opts);
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; transport_opts.len()];
    loop {
        let moving: Vec<Option<usize>> = choice
            .iter()
            .zip(&transport_opts)
            .map(|(&c, opts)| opts[c])
            .collect();
        let mut fixed: Vec<Action> = Vec::new();
        let mut busy: Coalition = 0;
        for (j, dest) in moving.iter().enumerate() {
            if let Some(to) = *dest {
                let c = st.grasp[j];
                busy |= c;
                fixed.push(Action::Transport {
                    object: j,
                    coalition: c,
                    from: st.objects[j] as usize,
                    to,
                });
            }
        }
        let per_robot: Vec<Vec<Action>> = (0..n)
            .map(|i| {
                if busy >> i & 1 == 1 {
                    return Vec::new();
                }
                let here = st.robots[i] as usize;
                let mut acts = vec![Action::Stay { robot: i }];
                match st.held_by(i) {
                    Some(j) => acts.push(Action::Release { robot: i, object: j }),
                    None => {
                        acts.extend(
                            (0..k)
                                .filter(|&r| r != here)
                                .map(|to| Action::Navigate { robot: i, from: here, to }),
                        );
                        acts.extend(
                            (0..st.objects.len())
                                .filter(|&j| st.objects[j] as usize == here && moving[j].is_none())
                                .map(|j| Action::Grasp { robot: i, object: j }),
                        );
                    }
                }
                acts
            })
            .collect();
        enumerate_robot_choices(st, s, &fixed, &per_robot, &mut out);

        // advance the mixed-radix transport counter
        let mut d = 0;
        loop {
            if d == choice.len() {
                return out;
            }
            choice[d] += 1;
            if choice[d] < transport_opts[d].len() {
                break;
            }
            choice[d] = 0;
            d += 1;
        }
    }
}

fn enumerate_robot_choices(
    st: &TsState,
    s: &Scenario,
    fixed: &[Action],
    per_robot: &[Vec<Action>],
    out: &mut Vec<TsTransition>,
) {
    let free: Vec<usize> = (0..per_robot.len()).filter(|&i| !per_robot[i].is_empty()).collect();
    let mut idx = vec![0usize; free.len()];
    loop {
        let mut actions: Vec<Action> = fixed.to_vec();
        actions.extend(free.iter().zip(&idx).map(|(&i, &c)| per_robot[i][c].clone()));
        actions.sort_by_key(Action::lead_robot);
        let target = apply(st, &actions);
        if state_valid(&target, s) {
            let cost = transition_cost(&actions, s);
            out.push(TsTransition {
                source: st.clone(),
                target,
                actions,
                cost,
            });
        }
        let mut d = 0;
        loop {
            if d == free.len() {
                return;
            }
            idx[d] += 1;
            if idx[d] < per_robot[free[d]].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
