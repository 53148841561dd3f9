//! Sampling-based prefix-suffix planner. Trees are grown incrementally over
//! the product space; the product automaton is never built explicitly.

use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::Nba;
use crate::par::{self, Execution};
use crate::product::{PlanError, PrefixSuffixPlan, ProductState};
use crate::ts::{state_valid, successors, TsState, TsTransition};
use crate::world::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    /// Iterations per tree.
    pub n_max: usize,
    pub seed: u64,
    /// Probability of expanding the newest node instead of a uniform pick.
    pub bias: f64,
    /// At most this many suffix trees are grown, rooted at the accepting
    /// nodes with the cheapest prefixes.
    pub max_suffix_trees: usize,
    /// Iterations per suffix tree; `None` reuses `n_max`.
    pub suffix_n_max: Option<usize>,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            n_max: 100_000,
            seed: 0,
            bias: 0.3,
            max_suffix_trees: 16,
            suffix_n_max: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("n_max must be at least 1")]
    NoIterations,
    #[error("bias {0} is outside [0, 1]")]
    Bias(f64),
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.n_max == 0 || self.suffix_n_max == Some(0) {
            return Err(ParamsError::NoIterations);
        }
        if !(0.0..=1.0).contains(&self.bias) {
            return Err(ParamsError::Bias(self.bias));
        }
        Ok(())
    }
}

/// Interned transition-system states with memoized successors, shared by
/// all trees of one run. Successor lists keep the order of [`successors`].
struct TsCache<'a> {
    s: &'a Scenario,
    inner: RwLock<Interned>,
}

/// `(target id, cost)` for each successor of one state.
type SuccList = Arc<Vec<(u32, f64)>>;

#[derive(Default)]
struct Interned {
    ids: HashMap<TsState, u32>,
    states: Vec<TsState>,
    /// Filled in on first expansion.
    succ: Vec<Option<SuccList>>,
}

impl Interned {
    fn intern(&mut self, st: &TsState) -> u32 {
        if let Some(&id) = self.ids.get(st) {
            return id;
        }
        let id = self.states.len() as u32;
        self.ids.insert(st.clone(), id);
        self.states.push(st.clone());
        self.succ.push(None);
        id
    }
}

impl<'a> TsCache<'a> {
    fn new(s: &'a Scenario) -> Self {
        TsCache { s, inner: RwLock::new(Interned::default()) }
    }

    fn intern(&self, st: &TsState) -> u32 {
        if let Some(&id) = self.inner.read().expect("cache lock").ids.get(st) {
            return id;
        }
        self.inner.write().expect("cache lock").intern(st)
    }

    fn state(&self, id: u32) -> TsState {
        self.inner.read().expect("cache lock").states[id as usize].clone()
    }

    fn successors(&self, id: u32) -> SuccList {
        let st = {
            let inner = self.inner.read().expect("cache lock");
            if let Some(hit) = &inner.succ[id as usize] {
                return hit.clone();
            }
            inner.states[id as usize].clone()
        };
        let fresh = successors(&st, self.s);
        let mut inner = self.inner.write().expect("cache lock");
        let list: Vec<(u32, f64)> = fresh.iter().map(|t| (inner.intern(&t.target), t.cost)).collect();
        inner.succ[id as usize].get_or_insert_with(|| Arc::new(list)).clone()
    }
}

/// Successor of an expanded node: child node id, index of the TS transition
/// in `successors(parent)`, and its cost.
#[derive(Clone, Copy, Debug)]
struct Succ {
    node: usize,
    k: usize,
    cost: f64,
}

/// Queued cost improvement: new cost, node, and the link giving it. Ordered
/// so that a max-heap pops the cheapest first.
struct Pending(f64, usize, Succ);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Tree over product states with cost-from-root and rewiring.
#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: Vec<ProductState>,
    index: HashMap<ProductState, usize>,
    /// `(interned TS state, automaton state) -> node`, for the hot path.
    keys: HashMap<(u32, usize), usize>,
    ts_ids: Vec<u32>,
    /// Parent id and the TS transition leading here, as in [`Succ`].
    parent: Vec<Option<Succ>>,
    cost: Vec<f64>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    expanded: Vec<Option<Vec<Succ>>>,
    /// Nodes not yet expanded, and each node's slot in it.
    frontier: Vec<usize>,
    slot: Vec<usize>,
}

impl SearchTree {
    fn with_roots(roots: impl IntoIterator<Item = ProductState>, cache: &TsCache) -> Self {
        let mut t = SearchTree {
            nodes: Vec::new(),
            index: HashMap::new(),
            keys: HashMap::new(),
            ts_ids: Vec::new(),
            parent: Vec::new(),
            cost: Vec::new(),
            children: Vec::new(),
            roots: Vec::new(),
            expanded: Vec::new(),
            frontier: Vec::new(),
            slot: Vec::new(),
        };
        for r in roots {
            if !t.index.contains_key(&r) {
                let tid = cache.intern(&r.ts);
                let id = t.push(r, tid, None, 0.0);
                t.roots.push(id);
            }
        }
        t
    }

    fn push(&mut self, p: ProductState, tid: u32, parent: Option<Succ>, cost: f64) -> usize {
        let id = self.nodes.len();
        self.keys.insert((tid, p.nba), id);
        self.ts_ids.push(tid);
        self.index.insert(p.clone(), id);
        self.nodes.push(p);
        self.parent.push(parent);
        self.cost.push(cost);
        self.children.push(Vec::new());
        self.expanded.push(None);
        self.slot.push(self.frontier.len());
        self.frontier.push(id);
        if let Some(par) = parent {
            self.children[par.node].push(id);
        }
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn state(&self, id: usize) -> &ProductState {
        &self.nodes[id]
    }

    pub fn id(&self, p: &ProductState) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn cost(&self, id: usize) -> f64 {
        self.cost[id]
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.parent[id].map(|p| p.node)
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// TS transitions from the root down to `id`.
    pub fn path(&self, id: usize, s: &Scenario) -> Vec<TsTransition> {
        let mut links = Vec::new();
        let mut cur = id;
        while let Some(p) = self.parent[cur] {
            links.push((p.node, p.k));
            cur = p.node;
        }
        links.reverse();
        links.into_iter().map(|(from, k)| self.transition(from, k, s)).collect()
    }

    fn transition(&self, from: usize, k: usize, s: &Scenario) -> TsTransition {
        successors(&self.nodes[from].ts, s).swap_remove(k)
    }

    /// Recomputes every cost from the roots along child links and checks it
    /// against the stored value; also checks that every node is reached
    /// exactly once, i.e. the parent links form a forest over the roots.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = Vec::new();
        for &r in &self.roots {
            if self.cost[r] != 0.0 || self.parent[r].is_some() {
                return Err(format!("root {r} has cost {} or a parent", self.cost[r]));
            }
            visited[r] = true;
            stack.push(r);
        }
        while let Some(v) = stack.pop() {
            for &w in &self.children[v] {
                let p = self.parent[w].ok_or_else(|| format!("child {w} of {v} has no parent"))?;
                if p.node != v {
                    return Err(format!("node {w} listed under {v} but its parent is {}", p.node));
                }
                if std::mem::replace(&mut visited[w], true) {
                    return Err(format!("node {w} reached twice"));
                }
                let expect = self.cost[v] + p.cost;
                if expect != self.cost[w] {
                    return Err(format!("node {w}: stored cost {} but path cost {expect}", self.cost[w]));
                }
                stack.push(w);
            }
        }
        match visited.iter().position(|&x| !x) {
            Some(v) => Err(format!("node {v} is not reachable from a root")),
            None => Ok(()),
        }
    }

    fn successors_of(&mut self, v: usize, nba: &Nba, cache: &TsCache) -> Vec<Succ> {
        if let Some(cached) = &self.expanded[v] {
            return cached.clone();
        }
        let letter = nba.encode(self.nodes[v].ts.label(cache.s));
        let qs: Vec<usize> = nba.successors(self.nodes[v].nba, &letter).collect();
        let mut out = Vec::new();
        if !qs.is_empty() {
            for (k, &(tid, cost)) in cache.successors(self.ts_ids[v]).iter().enumerate() {
                for &q in &qs {
                    let node = match self.keys.get(&(tid, q)) {
                        Some(&id) => id,
                        None => {
                            let child = ProductState { ts: cache.state(tid), nba: q };
                            self.push(child, tid, Some(Succ { node: v, k, cost }), self.cost[v] + cost)
                        }
                    };
                    out.push(Succ { node, k, cost });
                }
            }
        }
        self.expanded[v] = Some(out.clone());
        let at = self.slot[v];
        self.frontier.swap_remove(at);
        if let Some(&moved) = self.frontier.get(at) {
            self.slot[moved] = at;
        }
        out
    }

    /// Re-parents `w` under `link.node` and pushes the lower cost onward:
    /// down the subtree, and to any already enumerated successor that becomes
    /// cheaper through it, which is re-parented in turn. Costs only decrease
    /// and ancestors never cost more than descendants, so no cycle can form.
    fn rewire(&mut self, w: usize, link: Succ) {
        // cheapest tentative cost first, so each node settles once per call
        let mut heap = BinaryHeap::new();
        heap.push(Pending(self.cost[link.node] + link.cost, w, link));
        while let Some(Pending(through, x, link)) = heap.pop() {
            let current = self.parent[x].is_some_and(|p| p.node == link.node && p.k == link.k);
            // entries go stale when a cheaper route arrived in the meantime
            if through != self.cost[link.node] + link.cost || !(through < self.cost[x]) {
                continue;
            }
            if !current {
                let old = self.parent[x].expect("only non-roots are queued");
                let siblings = &mut self.children[old.node];
                if let Some(pos) = siblings.iter().position(|&c| c == x) {
                    siblings.swap_remove(pos);
                }
                self.children[link.node].push(x);
                self.parent[x] = Some(link);
            }
            self.cost[x] = through;
            for &c in &self.children[x] {
                let l = self.parent[c].expect("children have parents");
                heap.push(Pending(through + l.cost, c, l));
            }
            if let Some(succ) = &self.expanded[x] {
                for e in succ {
                    if self.parent[e.node].is_some() && through + e.cost < self.cost[e.node] {
                        heap.push(Pending(through + e.cost, e.node, Succ { node: x, k: e.k, cost: e.cost }));
                    }
                }
            }
        }
    }

    /// One growth iteration: expands `v` and rewires its successors. Returns
    /// the successors for callers that look for special targets.
    fn expand(&mut self, v: usize, nba: &Nba, cache: &TsCache) -> Vec<Succ> {
        let succ = self.successors_of(v, nba, cache);
        for e in &succ {
            let w = e.node;
            if self.parent[w].is_none() {
                continue; // roots stay at cost 0
            }
            let through = self.cost[v] + e.cost;
            if through < self.cost[w] {
                self.rewire(w, Succ { node: v, k: e.k, cost: e.cost });
            }
        }
        succ
    }

    /// The newest node with probability `bias`, otherwise a uniform pick
    /// among unexpanded nodes. Expanded nodes are skipped because the rewire
    /// cascade already keeps their successors' costs current, so expanding
    /// them again would change nothing. `None` once every node is expanded.
    fn select(&self, rng: &mut ChaCha8Rng, bias: f64) -> Option<usize> {
        let newest = self.nodes.len() - 1;
        if rng.random::<f64>() < bias && self.expanded[newest].is_none() {
            return Some(newest);
        }
        if self.frontier.is_empty() {
            return None;
        }
        Some(self.frontier[rng.random_range(0..self.frontier.len())])
    }
}

fn initial_states(s: &Scenario, nba: &Nba) -> Result<Vec<ProductState>, PlanError> {
    let ts = TsState::initial(s);
    if !state_valid(&ts, s) {
        return Err(PlanError::InvalidInitial);
    }
    Ok(nba
        .initial()
        .iter()
        .map(|&q| ProductState { ts: ts.clone(), nba: q })
        .collect())
}

fn debug_check(tree: &SearchTree, iteration: usize) {
    if cfg!(debug_assertions) && (iteration + 1).is_multiple_of(1000) {
        if let Err(e) = tree.check_invariants() {
            panic!("search tree invariant broken after {} iterations: {e}", iteration + 1);
        }
    }
}

/// Grows a tree from the initial product states for `params.n_max`
/// iterations. Returns the tree and the accepting nodes in discovery order.
pub fn grow_prefix_tree(s: &Scenario, nba: &Nba, params: &PlannerParams) -> Result<(SearchTree, Vec<usize>), PlanError> {
    grow_prefix(nba, params, &TsCache::new(s))
}

fn grow_prefix(nba: &Nba, params: &PlannerParams, cache: &TsCache) -> Result<(SearchTree, Vec<usize>), PlanError> {
    let s = cache.s;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut tree = SearchTree::with_roots(initial_states(s, nba)?, cache);
    let mut accepting: Vec<usize> = tree.roots.iter().copied().filter(|&r| nba.is_accepting(tree.nodes[r].nba)).collect();
    if tree.is_empty() {
        return Ok((tree, accepting));
    }
    for it in 0..params.n_max {
        let before = tree.len();
        let Some(v) = tree.select(&mut rng, params.bias) else {
            break;
        };
        tree.expand(v, nba, cache);
        accepting.extend((before..tree.len()).filter(|&w| nba.is_accepting(tree.nodes[w].nba)));
        debug_check(&tree, it);
    }
    Ok((tree, accepting))
}

/// Grows a tree from an accepting product state and returns the cheapest cycle
/// back to it that was found, with its cost.
pub fn grow_suffix_tree(root: &ProductState, s: &Scenario, nba: &Nba, params: &PlannerParams) -> Option<(Vec<TsTransition>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_max = params.suffix_n_max.unwrap_or(params.n_max);
    suffix_with_rng(root, nba, n_max, params.bias, &mut rng, &TsCache::new(s))
}

fn suffix_with_rng(
    root: &ProductState,
    nba: &Nba,
    n_max: usize,
    bias: f64,
    rng: &mut ChaCha8Rng,
    cache: &TsCache,
) -> Option<(Vec<TsTransition>, f64)> {
    let s = cache.s;
    let mut tree = SearchTree::with_roots([root.clone()], cache);
    let mut closers: Vec<Succ> = Vec::new();
    let mut seen = HashSet::new();
    for it in 0..n_max {
        let Some(v) = tree.select(rng, bias) else {
            break;
        };
        for e in tree.expand(v, nba, cache) {
            if e.node == 0 && seen.insert((v, e.k)) {
                closers.push(Succ { node: v, k: e.k, cost: e.cost });
            }
        }
        debug_check(&tree, it);
    }
    // costs may have dropped through rewiring since detection
    let best = closers
        .iter()
        .map(|c| (tree.cost[c.node] + c.cost, c))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.node.cmp(&b.1.node)).then(a.1.k.cmp(&b.1.k)))?;
    let (cost, c) = best;
    let mut cycle = tree.path(c.node, s);
    cycle.push(tree.transition(c.node, c.k, s));
    Some((cycle, cost))
}

/// At most `cap` accepting nodes, taken round-robin over automaton states
/// and cheapest prefix first within each. Accepting automaton states whose
/// cycles are blocked by the transition system then cannot use up the cap.
fn suffix_roots(tree: &SearchTree, mut accepting: Vec<usize>, cap: usize) -> Vec<usize> {
    accepting.sort_by(|&a, &b| tree.cost(a).total_cmp(&tree.cost(b)).then_with(|| tree.state(a).cmp(tree.state(b))));
    accepting.dedup();
    let mut by_state: BTreeMap<usize, VecDeque<usize>> = BTreeMap::new();
    for a in accepting {
        by_state.entry(tree.state(a).nba).or_default().push_back(a);
    }
    let mut roots = Vec::new();
    while roots.len() < cap && !by_state.is_empty() {
        by_state.retain(|_, queue| {
            if roots.len() < cap {
                roots.extend(queue.pop_front());
            }
            !queue.is_empty()
        });
    }
    roots
}

/// Prefix tree, then one suffix tree per selected accepting node (see
/// [`suffix_roots`]), returning the cheapest combination.
///
/// Suffix trees are independent and run under `params.exec`; each draws from
/// its own stream of the seeded generator, so results do not depend on the
/// execution strategy.
pub fn plan_sampling(s: &Scenario, nba: &Nba, params: &PlannerParams) -> Result<Option<PrefixSuffixPlan>, PlanError> {
    let cache = TsCache::new(s);
    let (tree, accepting) = grow_prefix(nba, params, &cache)?;
    let roots = suffix_roots(&tree, accepting, params.max_suffix_trees);
    let n_suffix = params.suffix_n_max.unwrap_or(params.n_max);
    let found = par::map_range(params.exec, roots.len(), |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(i as u64 + 1);
        suffix_with_rng(tree.state(roots[i]), nba, n_suffix, params.bias, &mut rng, &cache)
    });
    let best = roots
        .iter()
        .zip(found)
        .filter_map(|(&a, f)| f.map(|(cycle, c)| (tree.cost(a) + c, a, cycle)))
        .min_by(|x, y| x.0.total_cmp(&y.0).then_with(|| tree.state(x.1).cmp(tree.state(y.1))));
    log::debug!("prefix tree {} nodes, {} suffix trees", tree.len(), roots.len());
    Ok(best.map(|(_, a, suffix)| PrefixSuffixPlan {
        prefix: tree.path(a, s),
        suffix,
    }))
}
