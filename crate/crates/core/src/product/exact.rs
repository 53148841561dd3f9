use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{PlanError, PrefixSuffixPlan};
use crate::ltl::{EncodedLetter, Nba};
use crate::par::{self, Execution};
use crate::ts::{build_ts, Ts, TsError, TsTransition};
use crate::world::Scenario;

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    pub max_ts_states: usize,
    /// Bound on `|TS| · |NBA|`.
    pub max_product_states: usize,
    pub exec: Execution,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            max_ts_states: 1_000_000,
            max_product_states: 5_000_000,
            exec: Execution::default(),
        }
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on (cost, id)
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Predecessor on a shortest path: product id and TS edge index.
type Back = (usize, usize);

struct Product<'a> {
    ts: &'a Ts,
    /// Label class of each TS state.
    class: Vec<usize>,
    /// NBA successors for `(class, q)`, stored at `class * nq + q`.
    succ: Vec<Vec<usize>>,
    nq: usize,
}

impl Product<'_> {
    fn split(&self, p: usize) -> (usize, usize) {
        (p / self.nq, p % self.nq)
    }

    /// Calls `f(successor id, cost, ts edge index)`.
    fn for_each_succ(&self, p: usize, mut f: impl FnMut(usize, f64, usize)) {
        let (s, q) = self.split(p);
        let qs = &self.succ[self.class[s] * self.nq + q];
        if qs.is_empty() {
            return;
        }
        for n in self.ts.out_range(s) {
            let e = &self.ts.edges[n];
            for &q2 in qs {
                f(e.to * self.nq + q2, e.cost, n);
            }
        }
    }

    /// Follows back links from `to` until `stop` holds (or no link is left).
    fn path(&self, back: &HashMap<usize, Back>, to: usize, stop: impl Fn(usize) -> bool) -> Vec<TsTransition> {
        let mut edges = Vec::new();
        let mut cur = to;
        while let Some(&(prev, e)) = back.get(&cur) {
            edges.push(e);
            cur = prev;
            if stop(cur) {
                break;
            }
        }
        edges.reverse();
        edges.into_iter().map(|e| self.transition(e)).collect()
    }

    fn transition(&self, e: usize) -> TsTransition {
        let edge = &self.ts.edges[e];
        TsTransition {
            source: self.ts.states[edge.from].clone(),
            target: self.ts.states[edge.to].clone(),
            actions: edge.actions.clone(),
            cost: edge.cost,
        }
    }

    /// Cheapest nonempty cycle through `a` whose cost does not exceed `bound`.
    fn shortest_cycle(&self, a: usize, bound: f64) -> Option<(f64, Vec<TsTransition>)> {
        SCRATCH.with(|cell| {
            let mut sc = cell.borrow_mut();
            sc.reset(self.ts.num_states() * self.nq);
            let mut heap = BinaryHeap::new();
            let relax = |sc: &mut Scratch, heap: &mut BinaryHeap<Entry>, from: usize, to: usize, d: f64, e: usize| {
                if d <= bound && sc.dist(to).is_none_or(|old| d < old) {
                    sc.set(to, d, (from, e));
                    heap.push(Entry(d, to));
                }
            };
            self.for_each_succ(a, |t, c, e| relax(&mut sc, &mut heap, a, t, c, e));
            while let Some(Entry(d, p)) = heap.pop() {
                if !sc.settle(p) {
                    continue;
                }
                if p == a {
                    let mut edges = Vec::new();
                    let mut cur = a;
                    loop {
                        let (prev, e) = sc.back[cur];
                        edges.push(e);
                        cur = prev;
                        if cur == a {
                            break;
                        }
                    }
                    edges.reverse();
                    return Some((d, edges.into_iter().map(|e| self.transition(e)).collect()));
                }
                self.for_each_succ(p, |t, c, e| relax(&mut sc, &mut heap, p, t, d + c, e));
            }
            None
        })
    }
}

/// Dense per-thread Dijkstra buffers, invalidated by bumping a generation
/// counter instead of clearing.
#[derive(Default)]
struct Scratch {
    generation: u32,
    seen: Vec<u32>,
    done: Vec<u32>,
    dist: Vec<f64>,
    back: Vec<Back>,
}

impl Scratch {
    fn reset(&mut self, n: usize) {
        if self.seen.len() < n {
            self.seen = vec![0; n];
            self.done = vec![0; n];
            self.dist = vec![0.0; n];
            self.back = vec![(0, 0); n];
            self.generation = 0;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.seen.fill(0);
            self.done.fill(0);
            self.generation = 1;
        }
    }

    fn dist(&self, p: usize) -> Option<f64> {
        (self.seen[p] == self.generation).then(|| self.dist[p])
    }

    fn set(&mut self, p: usize, d: f64, back: Back) {
        self.seen[p] = self.generation;
        self.dist[p] = d;
        self.back[p] = back;
    }

    /// Marks `p` settled; false if it already was.
    fn settle(&mut self, p: usize) -> bool {
        let fresh = self.done[p] != self.generation;
        self.done[p] = self.generation;
        fresh
    }
}

thread_local! {
    static SCRATCH: std::cell::RefCell<Scratch> = std::cell::RefCell::default();
}

/// Optimal prefix-suffix plan over the explicit product, or `None` when the
/// product has no accepting lasso.
///
/// Dijkstra from the initial product states gives prefix costs; accepting
/// states are then visited in increasing prefix cost, each searched for its
/// cheapest cycle with a bound derived from the best plan so far. Ties are
/// broken by product state id, so the result does not depend on `exec`.
pub fn exact_plan(s: &Scenario, nba: &Nba, opts: ExactOptions) -> Result<Option<PrefixSuffixPlan>, PlanError> {
    let ts = build_ts(s, opts.max_ts_states, opts.exec).map_err(|e| match e {
        TsError::InvalidInitial => PlanError::InvalidInitial,
        TsError::Budget(n) => PlanError::Budget(n),
    })?;
    exact_plan_on(&ts, s, nba, opts)
}

/// As [`exact_plan`] on an already built transition system.
pub fn exact_plan_on(ts: &Ts, s: &Scenario, nba: &Nba, opts: ExactOptions) -> Result<Option<PrefixSuffixPlan>, PlanError> {
    let nq = nba.num_states();
    if ts.num_states().saturating_mul(nq) > opts.max_product_states {
        return Err(PlanError::Budget(opts.max_product_states));
    }
    let letters = par::map(opts.exec, &ts.states, |st| nba.encode(st.label(s)));
    let mut classes: HashMap<&EncodedLetter, usize> = HashMap::new();
    let mut succ = Vec::new();
    let class = letters
        .iter()
        .map(|l| {
            let next = classes.len();
            *classes.entry(l).or_insert_with(|| {
                succ.extend((0..nq).map(|q| nba.successors(q, l).collect::<Vec<_>>()));
                next
            })
        })
        .collect();
    let prod = Product { ts, class, succ, nq };

    // prefix Dijkstra
    let mut dist: HashMap<usize, f64> = HashMap::new();
    let mut back: HashMap<usize, Back> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for &q in nba.initial() {
        dist.insert(q, 0.0);
        heap.push(Entry(0.0, q));
    }
    let mut order: Vec<(f64, usize)> = Vec::new();
    let mut settled = std::collections::HashSet::new();
    while let Some(Entry(d, p)) = heap.pop() {
        if !settled.insert(p) {
            continue;
        }
        order.push((d, p));
        prod.for_each_succ(p, |t, c, e| {
            let nd = d + c;
            if dist.get(&t).is_none_or(|&old| nd < old) {
                dist.insert(t, nd);
                back.insert(t, (p, e));
                heap.push(Entry(nd, t));
            }
        });
    }
    let accepting: Vec<(f64, usize)> = order
        .into_iter()
        .filter(|&(_, p)| nba.is_accepting(p % nq))
        .collect();

    log::debug!("prefix search settled {} product states, {} accepting", settled.len(), accepting.len());
    let mut best: Option<(f64, usize, Vec<TsTransition>)> = None;
    let mut searched = 0usize;
    // A lone first search usually yields a bound that prunes the rest.
    let mut rest = &accepting[..];
    while !rest.is_empty() {
        let take = if best.is_none() { 1 } else { 32.min(rest.len()) };
        let (batch, tail) = rest.split_at(take);
        rest = tail;
        let best_cost = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        if batch[0].0 > best_cost {
            break;
        }
        searched += batch.len();
        let found = par::map(opts.exec, batch, |&(d0, a)| {
            if d0 > best_cost {
                return None;
            }
            prod.shortest_cycle(a, best_cost - d0).map(|(c, cyc)| (d0 + c, a, cyc))
        });
        for cand in found.into_iter().flatten() {
            let better = match &best {
                None => true,
                Some(b) => cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    log::debug!("searched cycles around {searched} accepting states");
    Ok(best.map(|(_, a, suffix)| {
        let prefix = prod.path(&back, a, |_| false);
        PrefixSuffixPlan { prefix, suffix }
    }))
}
