use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use super::lasso::{LassoWord, Letter};

pub type StateId = usize;

/// Propositional constraint on a transition: atoms that must hold and atoms
/// that must not hold. An empty label is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Label {
    pub must: BTreeSet<String>,
    pub must_not: BTreeSet<String>,
}

impl Label {
    pub fn matches(&self, letter: &Letter) -> bool {
        self.must.iter().all(|a| letter.contains(a))
            && self.must_not.iter().all(|a| !letter.contains(a))
    }

    pub fn is_true(&self) -> bool {
        self.must.is_empty() && self.must_not.is_empty()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_true() {
            return write!(f, "true");
        }
        let parts: Vec<String> = self
            .must
            .iter()
            .map(|a| format!("\"{a}\""))
            .chain(self.must_not.iter().map(|a| format!("!\"{a}\"")))
            .collect();
        write!(f, "{}", parts.join(" & "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: StateId,
    pub to: StateId,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NbaError {
    #[error("state {0} out of range")]
    StateOutOfRange(StateId),
    #[error("edge {from} -> {to} requires and forbids \"{atom}\"")]
    ContradictoryLabel {
        from: StateId,
        to: StateId,
        atom: String,
    },
}

/// Bit mask over the automaton's own atom table.
type Mask = Vec<u64>;

/// Nondeterministic Büchi automaton with propositionally labeled edges.
#[derive(Clone, Debug)]
pub struct Nba {
    num_states: usize,
    initial: Vec<StateId>,
    accepting: Vec<bool>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    atoms: Vec<String>,
    atom_index: HashMap<String, usize>,
    must_masks: Vec<Mask>,
    must_not_masks: Vec<Mask>,
}

impl Nba {
    pub fn new(
        num_states: usize,
        initial: Vec<StateId>,
        accepting: Vec<StateId>,
        edges: Vec<Edge>,
    ) -> Result<Self, NbaError> {
        for &s in initial.iter().chain(&accepting) {
            if s >= num_states {
                return Err(NbaError::StateOutOfRange(s));
            }
        }
        let mut atoms = BTreeSet::new();
        for e in &edges {
            for s in [e.from, e.to] {
                if s >= num_states {
                    return Err(NbaError::StateOutOfRange(s));
                }
            }
            if let Some(a) = e.label.must.intersection(&e.label.must_not).next() {
                return Err(NbaError::ContradictoryLabel {
                    from: e.from,
                    to: e.to,
                    atom: a.clone(),
                });
            }
            atoms.extend(e.label.must.iter().cloned());
            atoms.extend(e.label.must_not.iter().cloned());
        }
        let atoms: Vec<String> = atoms.into_iter().collect();
        let atom_index: HashMap<String, usize> =
            atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let words = atoms.len().div_ceil(64).max(1);
        let to_mask = |set: &BTreeSet<String>| {
            let mut m = vec![0u64; words];
            for a in set {
                let i = atom_index[a];
                m[i / 64] |= 1 << (i % 64);
            }
            m
        };
        let must_masks = edges.iter().map(|e| to_mask(&e.label.must)).collect();
        let must_not_masks = edges.iter().map(|e| to_mask(&e.label.must_not)).collect();
        let mut out = vec![Vec::new(); num_states];
        for (i, e) in edges.iter().enumerate() {
            out[e.from].push(i);
        }
        let mut acc = vec![false; num_states];
        for s in accepting {
            acc[s] = true;
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Ok(Nba {
            num_states,
            initial,
            accepting: acc,
            edges,
            out,
            atoms,
            atom_index,
            must_masks,
            must_not_masks,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting[s]
    }

    pub fn accepting_states(&self) -> Vec<StateId> {
        (0..self.num_states).filter(|&s| self.accepting[s]).collect()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Atoms mentioned by some edge label.
    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    /// Encodes a letter for fast label matching; atoms unknown to the
    /// automaton are irrelevant and dropped.
    pub fn encode<'a>(&self, letter: impl IntoIterator<Item = &'a str>) -> EncodedLetter {
        let mut m = vec![0u64; self.atoms.len().div_ceil(64).max(1)];
        for a in letter {
            if let Some(&i) = self.atom_index.get(a) {
                m[i / 64] |= 1 << (i % 64);
            }
        }
        EncodedLetter(m)
    }

    pub fn edge_matches(&self, edge: usize, letter: &EncodedLetter) -> bool {
        let must = &self.must_masks[edge];
        let must_not = &self.must_not_masks[edge];
        letter
            .0
            .iter()
            .zip(must.iter().zip(must_not))
            .all(|(l, (m, n))| m & !l == 0 && n & l == 0)
    }

    /// States reachable from `s` in one step reading `letter`, in edge order.
    pub fn successors<'a>(
        &'a self,
        s: StateId,
        letter: &'a EncodedLetter,
    ) -> impl Iterator<Item = StateId> + 'a {
        self.out[s]
            .iter()
            .filter(move |&&e| self.edge_matches(e, letter))
            .map(move |&e| self.edges[e].to)
    }

    /// Human-readable dump: state count, initial and accepting sets, edges.
    pub fn export(&self) -> String {
        let mut s = String::new();
        let join = |v: &[StateId]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(s, "states {}", self.num_states);
        let _ = writeln!(s, "initial {}", join(&self.initial));
        let _ = writeln!(s, "accepting {}", join(&self.accepting_states()));
        let _ = writeln!(s, "edges {}", self.edges.len());
        for e in &self.edges {
            let _ = writeln!(s, "{} -> {} : {}", e.from, e.to, e.label);
        }
        s
    }
}

/// A letter in the automaton's bit encoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodedLetter(Mask);

/// Decides acceptance of lasso words by one automaton, caching work per cycle.
///
/// For a cycle `c` the product of the automaton with the positions of `c` is
/// searched for nontrivial strongly connected components that contain an
/// accepting state; the states at cycle phase 0 that can reach such a
/// component form the "good" set. A word `u · c^ω` is accepted iff some state
/// reachable from an initial state by reading `u` is good.
pub struct LassoAcceptor<'a> {
    nba: &'a Nba,
    good_by_cycle: HashMap<Vec<EncodedLetter>, Vec<bool>>,
}

impl<'a> LassoAcceptor<'a> {
    pub fn new(nba: &'a Nba) -> Self {
        LassoAcceptor {
            nba,
            good_by_cycle: HashMap::new(),
        }
    }

    pub fn accepts(&mut self, w: &LassoWord) -> bool {
        let nba = self.nba;
        let mut current = vec![false; nba.num_states];
        for &s in &nba.initial {
            current[s] = true;
        }
        for letter in &w.prefix {
            let enc = nba.encode(letter.iter().map(String::as_str));
            let mut next = vec![false; nba.num_states];
            for s in (0..nba.num_states).filter(|&s| current[s]) {
                for t in nba.successors(s, &enc) {
                    next[t] = true;
                }
            }
            current = next;
        }
        let cycle: Vec<EncodedLetter> = w
            .cycle
            .iter()
            .map(|l| nba.encode(l.iter().map(String::as_str)))
            .collect();
        let good = self
            .good_by_cycle
            .entry(cycle)
            .or_insert_with_key(|cycle| good_states(nba, cycle));
        current.iter().zip(good.iter()).any(|(c, g)| *c && *g)
    }
}

/// States `q` such that `cycle^ω` has an accepting run from `q`.
fn good_states(nba: &Nba, cycle: &[EncodedLetter]) -> Vec<bool> {
    let c = cycle.len();
    let n = nba.num_states * c;
    let node = |q: StateId, j: usize| q * c + j;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..nba.num_states {
        for (j, letter) in cycle.iter().enumerate() {
            let jn = (j + 1) % c;
            adj[node(q, j)].extend(nba.successors(q, letter).map(|t| node(t, jn)));
        }
    }
    let comp = tarjan_scc(&adj);
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut size = vec![0usize; ncomp];
    for &k in &comp {
        size[k] += 1;
    }
    let mut fair = vec![false; ncomp];
    for v in 0..n {
        let q = v / c;
        if !nba.accepting[q] {
            continue;
        }
        let k = comp[v];
        if size[k] > 1 || adj[v].contains(&v) {
            fair[k] = true;
        }
    }
    // Backward reachability to fair components.
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, succ) in adj.iter().enumerate() {
        for &t in succ {
            radj[t].push(v);
        }
    }
    let mut good = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| fair[comp[v]]).collect();
    for &v in &stack {
        good[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &u in &radj[v] {
            if !good[u] {
                good[u] = true;
                stack.push(u);
            }
        }
    }
    (0..nba.num_states).map(|q| good[node(q, 0)]).collect()
}

/// Iterative Tarjan; returns a component index per node.
pub(crate) fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// True iff some run of `nba` over `w` visits an accepting state infinitely often.
pub fn nba_accepts_lasso(nba: &Nba, w: &LassoWord) -> bool {
    LassoAcceptor::new(nba).accepts(w)
}
