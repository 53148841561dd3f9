//! Brute-force oracles for the transition system and optimal plans. They share
//! only the scenario model and the packing predicate with the library.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use tempofleet::geom::dist;
use tempofleet::ltl::Nba;
use tempofleet::ts::{Action, TsState};
use tempofleet::world::{lambda_check, pack_spheres, Coalition};
use tempofleet::Scenario;

/// Per-grasp cost used to order otherwise equal plans.
const GRASP_COST: f64 = 1e-6;

fn held(c: Coalition, i: usize) -> bool {
    c >> i & 1 == 1
}

/// Validity written from the definition: grasping robots sit with their
/// object, nobody holds two objects, and each region's balls pack.
pub fn valid(st: &TsState, s: &Scenario) -> bool {
    let n = s.num_robots();
    for i in 0..n {
        let holds: Vec<usize> = (0..st.grasp.len()).filter(|&j| held(st.grasp[j], i)).collect();
        if holds.len() > 1 || holds.iter().any(|&j| st.objects[j] != st.robots[i]) {
            return false;
        }
    }
    for k in 0..s.num_regions() {
        let mut radii = Vec::new();
        for i in 0..n {
            let holding = st.grasp.iter().any(|&c| held(c, i));
            if !holding && st.robots[i] as usize == k {
                radii.push(s.robots[i].radius);
            }
        }
        for (j, &c) in st.grasp.iter().enumerate() {
            if st.objects[j] as usize != k {
                continue;
            }
            if c == 0 {
                radii.push(s.objects[j].radius);
            } else {
                let widest = (0..n).filter(|&i| held(c, i)).map(|i| s.robots[i].radius).fold(0.0, f64::max);
                radii.push(s.objects[j].radius + 2.0 * widest);
            }
        }
        if pack_spheres(&s.regions[k].disk(), &radii).is_none() {
            return false;
        }
    }
    true
}

/// Every state tuple (regions × grasp subsets) that passes [`valid`].
pub fn all_valid_states(s: &Scenario) -> Vec<TsState> {
    let (n, m, k) = (s.num_robots(), s.num_objects(), s.num_regions());
    let mut out = Vec::new();
    let total = k.pow((n + m) as u32) * (1usize << (n * m));
    for mut code in 0..total {
        let mut digit = |base: usize| {
            let d = code % base;
            code /= base;
            d
        };
        let robots: Vec<u8> = (0..n).map(|_| digit(k) as u8).collect();
        let objects: Vec<u8> = (0..m).map(|_| digit(k) as u8).collect();
        let grasp: Vec<Coalition> = (0..m).map(|_| digit(1 << n) as Coalition).collect();
        let st = TsState { robots, objects, grasp };
        if valid(&st, s) {
            out.push(st);
        }
    }
    out
}

/// What one robot does in a candidate action set.
#[derive(Clone, Copy, Debug)]
enum Choice {
    Stay,
    Go(usize),
    Grasp(usize),
    Release(usize),
    Carry(usize, usize),
}

/// Transitions leaving `st`, keyed by (target, sorted actions) with their
/// cost: every combination of per-robot choices is generated and then tested
/// against the transition clauses one by one.
pub fn successors(st: &TsState, s: &Scenario) -> BTreeMap<(TsState, Vec<Action>), f64> {
    let (n, m, k) = (s.num_robots(), s.num_objects(), s.num_regions());
    let mut options = vec![Choice::Stay];
    options.extend((0..k).map(Choice::Go));
    options.extend((0..m).map(Choice::Grasp));
    options.extend((0..m).map(Choice::Release));
    for j in 0..m {
        options.extend((0..k).map(move |to| Choice::Carry(j, to)));
    }
    let mut out = BTreeMap::new();
    let total = options.len().pow(n as u32);
    'combo: for mut code in 0..total {
        let picks: Vec<Choice> = (0..n)
            .map(|_| {
                let c = options[code % options.len()];
                code /= options.len();
                c
            })
            .collect();
        let mut next = st.clone();
        let mut actions = Vec::new();
        let mut cost = 0.0;
        let carried: BTreeSet<usize> = picks
            .iter()
            .filter_map(|c| if let Choice::Carry(j, _) = c { Some(*j) } else { None })
            .collect();
        for (i, pick) in picks.iter().enumerate() {
            let here = st.robots[i] as usize;
            let holding = (0..m).find(|&j| held(st.grasp[j], i));
            match *pick {
                Choice::Stay => actions.push(Action::Stay { robot: i }),
                Choice::Go(to) => {
                    // a robot that holds an object cannot leave it behind
                    if to == here || holding.is_some() {
                        continue 'combo;
                    }
                    next.robots[i] = to as u8;
                    cost += dist(s.regions[here].center, s.regions[to].center);
                    actions.push(Action::Navigate { robot: i, from: here, to });
                }
                Choice::Grasp(j) => {
                    if holding.is_some() || st.objects[j] as usize != here || carried.contains(&j) {
                        continue 'combo;
                    }
                    next.grasp[j] |= 1 << i;
                    cost += GRASP_COST;
                    actions.push(Action::Grasp { robot: i, object: j });
                }
                Choice::Release(j) => {
                    if holding != Some(j) || carried.contains(&j) {
                        continue 'combo;
                    }
                    next.grasp[j] &= !(1 << i);
                    cost += GRASP_COST;
                    actions.push(Action::Release { robot: i, object: j });
                }
                Choice::Carry(j, to) => {
                    if holding != Some(j) || to == st.objects[j] as usize {
                        continue 'combo;
                    }
                    next.robots[i] = to as u8;
                }
            }
        }
        for &j in &carried {
            let coalition = st.grasp[j];
            let from = st.objects[j] as usize;
            let dests: BTreeSet<usize> = (0..n)
                .filter_map(|i| match picks[i] {
                    Choice::Carry(o, to) if o == j => Some(to),
                    _ => None,
                })
                .collect();
            // the whole coalition, and only it, moves the object to one place
            let movers: Coalition = (0..n)
                .filter(|&i| matches!(picks[i], Choice::Carry(o, _) if o == j))
                .fold(0, |a, i| a | 1 << i);
            if dests.len() != 1 || movers != coalition {
                continue 'combo;
            }
            let powers: Vec<u32> = (0..n).filter(|&i| held(coalition, i)).map(|i| s.robots[i].power).collect();
            if !lambda_check(s.objects[j].required_power, &powers) {
                continue 'combo;
            }
            let to = *dests.iter().next().unwrap();
            next.objects[j] = to as u8;
            cost += dist(s.regions[from].center, s.regions[to].center);
            actions.push(Action::Transport { object: j, coalition, from, to });
        }
        if !valid(&next, s) {
            continue;
        }
        actions.sort();
        out.insert((next, actions), cost);
    }
    out
}

/// Reachable part of the brute-force transition system.
pub struct BruteTs {
    pub states: BTreeSet<TsState>,
    /// `(source, target, sorted actions) -> cost`.
    pub edges: BTreeMap<(TsState, TsState, Vec<Action>), f64>,
}

pub fn build(s: &Scenario) -> BruteTs {
    let valid_states: BTreeSet<TsState> = all_valid_states(s).into_iter().collect();
    let init = TsState::initial(s);
    assert!(valid_states.contains(&init), "initial state must be valid");
    let mut states = BTreeSet::from([init.clone()]);
    let mut edges = BTreeMap::new();
    let mut queue = VecDeque::from([init]);
    while let Some(st) = queue.pop_front() {
        for ((target, actions), cost) in successors(&st, s) {
            assert!(valid_states.contains(&target));
            if states.insert(target.clone()) {
                queue.push_back(target.clone());
            }
            edges.insert((st.clone(), target, actions), cost);
        }
    }
    BruteTs { states, edges }
}

/// Cost of the cheapest prefix-suffix plan over the explicit product of the
/// brute-force TS with `nba`. Product edges read the label of the source TS
/// state; the suffix is a nonempty cycle through an accepting product state.
pub fn optimal_cost(s: &Scenario, nba: &Nba) -> Option<f64> {
    optimal_cost_in(&build(s), s, nba)
}

/// Same as [`optimal_cost`] on an already built system. Shortest paths use a
/// textbook Dijkstra; accepting states are tried by increasing prefix cost
/// and a search stops once it cannot beat the best lasso so far.
pub fn optimal_cost_in(ts: &BruteTs, s: &Scenario, nba: &Nba) -> Option<f64> {
    let states: Vec<&TsState> = ts.states.iter().collect();
    let id: BTreeMap<&TsState, usize> = states.iter().enumerate().map(|(i, st)| (*st, i)).collect();
    let nq = nba.num_states();
    let size = states.len() * nq;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
    let letters: Vec<_> = states.iter().map(|st| st.label_set(s)).collect();
    for ((from, to, _), &cost) in &ts.edges {
        let (a, b) = (id[from], id[to]);
        for e in nba.edges() {
            if e.label.matches(&letters[a]) {
                adj[a * nq + e.from].push((b * nq + e.to, cost));
            }
        }
    }
    // distances from `sources`, with the sources themselves only reached
    // again through a nonempty path when `cycle` is set
    let dijkstra = |sources: &[usize], cycle: bool, bound: f64| {
        let mut d = vec![f64::INFINITY; size];
        let mut heap = BinaryHeap::new();
        for &src in sources {
            if cycle {
                for &(w, c) in &adj[src] {
                    heap.push(Reverse((Ordered(c), w)));
                }
            } else {
                heap.push(Reverse((Ordered(0.0), src)));
            }
        }
        while let Some(Reverse((Ordered(dv), v))) = heap.pop() {
            if dv >= d[v] || dv >= bound {
                continue;
            }
            d[v] = dv;
            for &(w, c) in &adj[v] {
                if dv + c < d[w] {
                    heap.push(Reverse((Ordered(dv + c), w)));
                }
            }
        }
        d
    };
    let init = id[&TsState::initial(s)];
    let starts: Vec<usize> = nba.initial().iter().map(|&q| init * nq + q).collect();
    let prefix = dijkstra(&starts, false, f64::INFINITY);
    let mut accepting: Vec<usize> = (0..size).filter(|&a| nba.is_accepting(a % nq) && prefix[a].is_finite()).collect();
    accepting.sort_by(|&x, &y| prefix[x].total_cmp(&prefix[y]));
    let mut best = f64::INFINITY;
    for a in accepting {
        if prefix[a] >= best {
            break;
        }
        let cycle = dijkstra(&[a], true, best - prefix[a])[a];
        best = best.min(prefix[a] + cycle);
    }
    best.is_finite().then_some(best)
}

/// Total order on the finite costs used here.
#[derive(Clone, Copy, PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Number of product states (TS states times automaton states).
pub fn product_size(s: &Scenario, nba: &Nba) -> usize {
    build(s).states.len() * nba.num_states()
}
