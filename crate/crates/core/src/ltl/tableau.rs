//! Tableau (expand-node) translation from NNF formulas to generalized Büchi
//! automata, followed by counter-based degeneralization.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::nba::{Edge, Label, Nba};
use super::{to_nnf, Formula};

type Fid = usize;

/// Subformula table; children are referenced by id.
#[derive(Default)]
struct Closure {
    formulas: Vec<Formula>,
    index: HashMap<Formula, Fid>,
}

#[derive(Clone, Copy)]
enum Kind {
    True,
    False,
    Literal,
    And(Fid, Fid),
    Or(Fid, Fid),
    Next(Fid),
    Until(Fid, Fid),
    Release(Fid, Fid),
}

impl Closure {
    fn intern(&mut self, f: &Formula) -> Fid {
        if let Some(&id) = self.index.get(f) {
            return id;
        }
        match f {
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                self.intern(a);
                self.intern(b);
            }
            Formula::Next(a) | Formula::Not(a) => {
                self.intern(a);
            }
            _ => {}
        }
        let id = self.formulas.len();
        self.formulas.push(f.clone());
        self.index.insert(f.clone(), id);
        id
    }

    fn kind(&self, id: Fid) -> Kind {
        let child = |f: &Formula| self.index[f];
        match &self.formulas[id] {
            Formula::True => Kind::True,
            Formula::False => Kind::False,
            Formula::Atom(_) | Formula::Not(_) => Kind::Literal,
            Formula::And(a, b) => Kind::And(child(a), child(b)),
            Formula::Or(a, b) => Kind::Or(child(a), child(b)),
            Formula::Next(a) => Kind::Next(child(a)),
            Formula::Until(a, b) => Kind::Until(child(a), child(b)),
            Formula::Release(a, b) => Kind::Release(child(a), child(b)),
            Formula::Eventually(_) | Formula::Always(_) => {
                unreachable!("tableau input must be in negation normal form")
            }
        }
    }

    fn complement(&self, id: Fid) -> Option<Fid> {
        match &self.formulas[id] {
            Formula::Not(a) => self.index.get(&**a).copied(),
            f @ Formula::Atom(_) => self.index.get(&f.clone().not()).copied(),
            _ => None,
        }
    }
}

const INIT: usize = usize::MAX;

#[derive(Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    old: BTreeSet<Fid>,
    new: BTreeSet<Fid>,
    next: BTreeSet<Fid>,
}

/// Translates `f` into an NBA accepting exactly the words satisfying `f`.
///
/// Formulas not already in negation normal form are normalized first. The
/// output is deterministic for a given input; states are numbered in
/// breadth-first order from the initial state `0`.
///
/// Maximal propositional subformulas are replaced by fresh atoms before the
/// tableau runs and expanded back into conjunctive edge labels afterwards.
/// This keeps the tableau from enumerating every way a state constraint such
/// as `!(a & b & c)` can hold.
pub fn translate(f: &Formula) -> Nba {
    let f = if f.is_nnf() { f.clone() } else { to_nnf(f) };
    let mut defs = Vec::new();
    let g = abstract_props(&f, &mut defs);
    let nba = tableau(&g);
    if defs.is_empty() {
        return reduce(&nba);
    }
    let expansions: Vec<Vec<Label>> = defs.iter().map(dnf).collect();
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for e in nba.edges() {
        let mut base = e.label.clone();
        let mut terms = vec![Label::default()];
        for (k, expansion) in expansions.iter().enumerate() {
            if base.must.remove(&fresh_atom(k)) {
                terms = conjoin(&terms, expansion);
            }
        }
        for t in conjoin(&[base], &terms) {
            if seen.insert((e.from, e.to, t.clone())) {
                edges.push(Edge { from: e.from, to: e.to, label: t });
            }
        }
    }
    let accepting = nba.accepting_states();
    let expanded = Nba::new(nba.num_states(), nba.initial().to_vec(), accepting, edges)
        .expect("expanded labels are consistent");
    reduce(&expanded)
}

/// Language-preserving cleanup: drops states that cannot reach an accepting
/// cycle, then merges bisimilar states (same acceptance, same labelled moves
/// into the same classes). States are renumbered breadth-first from the
/// initial state.
fn reduce(nba: &Nba) -> Nba {
    let n = nba.num_states();
    let mut adj = vec![Vec::new(); n];
    for e in nba.edges() {
        adj[e.from].push(e.to);
    }
    // live = can reach a nontrivial SCC containing an accepting state
    let comp = super::nba::tarjan_scc(&adj);
    let mut comp_size = HashMap::new();
    for &c in &comp {
        *comp_size.entry(c).or_insert(0usize) += 1;
    }
    let mut live = vec![false; n];
    for q in 0..n {
        let cyclic = comp_size[&comp[q]] > 1 || adj[q].contains(&q);
        live[q] = cyclic && nba.is_accepting(q);
    }
    let mut radj = vec![Vec::new(); n];
    for e in nba.edges() {
        radj[e.to].push(e.from);
    }
    let mut work: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
    while let Some(q) = work.pop() {
        for &p in &radj[q] {
            if !live[p] {
                live[p] = true;
                work.push(p);
            }
        }
    }

    // partition refinement on the live part
    let mut block: Vec<usize> = (0..n).map(|q| usize::from(nba.is_accepting(q))).collect();
    loop {
        let mut sigs: HashMap<(usize, BTreeSet<(Label, usize)>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for q in 0..n {
            if !live[q] {
                continue;
            }
            let moves: BTreeSet<(Label, usize)> = nba
                .edges()
                .iter()
                .filter(|e| e.from == q && live[e.to])
                .map(|e| (e.label.clone(), block[e.to]))
                .collect();
            let fresh = sigs.len();
            next[q] = *sigs.entry((block[q], moves)).or_insert(fresh);
        }
        let before = (0..n).filter(|&q| live[q]).map(|q| block[q]).collect::<BTreeSet<_>>().len();
        block = next;
        if sigs.len() == before {
            break;
        }
    }

    // breadth-first renumbering of the quotient
    let mut out_edges: Vec<Vec<&Edge>> = vec![Vec::new(); n];
    for e in nba.edges() {
        if live[e.from] && live[e.to] {
            out_edges[e.from].push(e);
        }
    }
    let rep_of_block = |b: usize| (0..n).find(|&q| live[q] && block[q] == b).expect("block is nonempty");
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for &q in nba.initial() {
        if live[q] && !ids.contains_key(&block[q]) {
            ids.insert(block[q], order.len());
            order.push(block[q]);
            queue.push_back(block[q]);
        }
    }
    if order.is_empty() {
        return Nba::new(1, vec![0], Vec::new(), Vec::new()).expect("empty automaton is valid");
    }
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut accepting = Vec::new();
    while let Some(b) = queue.pop_front() {
        let q = rep_of_block(b);
        let from = ids[&b];
        if nba.is_accepting(q) {
            accepting.push(from);
        }
        for e in &out_edges[q] {
            let tb = block[e.to];
            let to = *ids.entry(tb).or_insert_with(|| {
                order.push(tb);
                queue.push_back(tb);
                order.len() - 1
            });
            if seen.insert((from, to, e.label.clone())) {
                edges.push(Edge { from, to, label: e.label.clone() });
            }
        }
    }
    let initial = (0..order.len()).filter(|&i| nba.initial().iter().any(|&q| live[q] && block[q] == order[i])).collect();
    Nba::new(order.len(), initial, accepting, edges).expect("quotient keeps labels")
}

/// Name of the `k`-th abstraction atom. The leading NUL keeps it disjoint
/// from anything the parser can produce.
fn fresh_atom(k: usize) -> String {
    format!("\0p{k}")
}

fn is_temporal_free(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => true,
        Formula::Not(a) => is_temporal_free(a),
        Formula::And(a, b) | Formula::Or(a, b) => is_temporal_free(a) && is_temporal_free(b),
        _ => false,
    }
}

/// Replaces maximal propositional subformulas that are not literals by fresh
/// atoms; `defs[k]` is the subformula behind `fresh_atom(k)`.
fn abstract_props(f: &Formula, defs: &mut Vec<Formula>) -> Formula {
    let literal = matches!(f, Formula::True | Formula::False | Formula::Atom(_))
        || matches!(f, Formula::Not(a) if matches!(**a, Formula::Atom(_)));
    if literal {
        return f.clone();
    }
    if is_temporal_free(f) {
        let k = defs.iter().position(|d| d == f).unwrap_or_else(|| {
            defs.push(f.clone());
            defs.len() - 1
        });
        return Formula::atom(fresh_atom(k));
    }
    let rec = |x: &Formula, defs: &mut Vec<Formula>| Box::new(abstract_props(x, defs));
    match f {
        Formula::Not(a) => Formula::Not(rec(a, defs)),
        Formula::Next(a) => Formula::Next(rec(a, defs)),
        Formula::Eventually(a) => Formula::Eventually(rec(a, defs)),
        Formula::Always(a) => Formula::Always(rec(a, defs)),
        Formula::And(a, b) => Formula::And(rec(a, defs), rec(b, defs)),
        Formula::Or(a, b) => Formula::Or(rec(a, defs), rec(b, defs)),
        Formula::Until(a, b) => Formula::Until(rec(a, defs), rec(b, defs)),
        Formula::Release(a, b) => Formula::Release(rec(a, defs), rec(b, defs)),
        _ => unreachable!("leaves are literals"),
    }
}

/// Disjunctive normal form of a propositional NNF formula as a list of
/// satisfiable conjunctive labels.
fn dnf(f: &Formula) -> Vec<Label> {
    match f {
        Formula::True => vec![Label::default()],
        Formula::False => Vec::new(),
        Formula::Atom(a) => vec![Label {
            must: [a.clone()].into(),
            must_not: BTreeSet::new(),
        }],
        Formula::Not(a) => match &**a {
            Formula::Atom(a) => vec![Label {
                must: BTreeSet::new(),
                must_not: [a.clone()].into(),
            }],
            _ => unreachable!("input is in negation normal form"),
        },
        Formula::And(a, b) => conjoin(&dnf(a), &dnf(b)),
        Formula::Or(a, b) => {
            let mut out = dnf(a);
            for t in dnf(b) {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
            out
        }
        _ => unreachable!("input is temporal-free"),
    }
}

/// Pairwise conjunction of two label lists, dropping contradictions.
fn conjoin(xs: &[Label], ys: &[Label]) -> Vec<Label> {
    let mut out = Vec::new();
    for x in xs {
        for y in ys {
            let must: BTreeSet<String> = x.must.union(&y.must).cloned().collect();
            let must_not: BTreeSet<String> = x.must_not.union(&y.must_not).cloned().collect();
            if must.is_disjoint(&must_not) {
                let t = Label { must, must_not };
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

fn tableau(f: &Formula) -> Nba {
    let mut cl = Closure::default();
    let root = cl.intern(f);

    let mut done: Vec<Node> = Vec::new();
    let mut done_index: HashMap<(BTreeSet<Fid>, BTreeSet<Fid>), usize> = HashMap::new();
    let mut stack = vec![Node {
        incoming: [INIT].into(),
        old: BTreeSet::new(),
        new: [root].into(),
        next: BTreeSet::new(),
    }];

    while let Some(mut node) = stack.pop() {
        let Some(eta) = node.new.pop_first() else {
            let key = (node.old.clone(), node.next.clone());
            if let Some(&id) = done_index.get(&key) {
                done[id].incoming.extend(node.incoming);
            } else {
                let id = done.len();
                let successor = Node {
                    incoming: [id].into(),
                    old: BTreeSet::new(),
                    new: node.next.clone(),
                    next: BTreeSet::new(),
                };
                done.push(node);
                done_index.insert(key, id);
                stack.push(successor);
            }
            continue;
        };
        if node.old.contains(&eta) {
            stack.push(node);
            continue;
        }
        let add_new = |n: &mut Node, ids: &[Fid]| {
            for &x in ids {
                if !n.old.contains(&x) {
                    n.new.insert(x);
                }
            }
        };
        match cl.kind(eta) {
            Kind::False => {}
            Kind::True => {
                node.old.insert(eta);
                stack.push(node);
            }
            Kind::Literal => {
                if cl.complement(eta).is_some_and(|c| node.old.contains(&c)) {
                    continue;
                }
                node.old.insert(eta);
                stack.push(node);
            }
            Kind::And(a, b) => {
                add_new(&mut node, &[a, b]);
                node.old.insert(eta);
                stack.push(node);
            }
            Kind::Next(a) => {
                node.old.insert(eta);
                node.next.insert(a);
                stack.push(node);
            }
            Kind::Or(a, b) | Kind::Until(a, b) | Kind::Release(a, b) => {
                let mut first = node.clone();
                let mut second = node;
                match cl.kind(eta) {
                    Kind::Or(..) => {
                        add_new(&mut first, &[a]);
                        add_new(&mut second, &[b]);
                    }
                    Kind::Until(..) => {
                        add_new(&mut first, &[a]);
                        first.next.insert(eta);
                        add_new(&mut second, &[b]);
                    }
                    _ => {
                        add_new(&mut first, &[b]);
                        first.next.insert(eta);
                        add_new(&mut second, &[a, b]);
                    }
                }
                first.old.insert(eta);
                second.old.insert(eta);
                // `first` is expanded before `second`.
                stack.push(second);
                stack.push(first);
            }
        }
    }

    degeneralize(&cl, &done)
}

fn node_label(cl: &Closure, node: &Node) -> Label {
    let mut label = Label::default();
    for &id in &node.old {
        match &cl.formulas[id] {
            Formula::Atom(a) => {
                label.must.insert(a.clone());
            }
            Formula::Not(inner) => {
                if let Formula::Atom(a) = &**inner {
                    label.must_not.insert(a.clone());
                }
            }
            _ => {}
        }
    }
    label
}

fn degeneralize(cl: &Closure, nodes: &[Node]) -> Nba {
    // One acceptance set per until-subformula `a U b`: the nodes that either do
    // not promise it or fulfil it right away.
    let untils: Vec<(Fid, Fid)> = (0..cl.formulas.len())
        .filter_map(|id| match cl.kind(id) {
            Kind::Until(_, b) => Some((id, b)),
            _ => None,
        })
        .collect();
    let sets = untils.len().max(1);
    let in_set = |q: usize, i: usize| -> bool {
        match untils.get(i) {
            None => true,
            Some(&(u, b)) => !nodes[q].old.contains(&u) || nodes[q].old.contains(&b),
        }
    };
    let labels: Vec<Label> = nodes.iter().map(|n| node_label(cl, n)).collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut init_succ = Vec::new();
    for (q, n) in nodes.iter().enumerate() {
        for &p in &n.incoming {
            if p == INIT {
                init_succ.push(q);
            } else {
                succ[p].push(q);
            }
        }
    }

    // Product states: None = fresh initial state, Some((node, counter)).
    let mut ids: HashMap<Option<(usize, usize)>, usize> = HashMap::new();
    let mut order: Vec<Option<(usize, usize)>> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(None, 0);
    order.push(None);
    queue.push_back(None);
    let mut edges = Vec::new();
    while let Some(st) = queue.pop_front() {
        let from = ids[&st];
        let targets: Vec<(usize, usize)> = match st {
            None => init_succ.iter().map(|&q| (q, 0)).collect(),
            Some((q, i)) => {
                let j = if in_set(q, i) { (i + 1) % sets } else { i };
                succ[q].iter().map(|&t| (t, j)).collect()
            }
        };
        for (t, j) in targets {
            let key = Some((t, j));
            let to = *ids.entry(key).or_insert_with(|| {
                order.push(key);
                queue.push_back(key);
                order.len() - 1
            });
            edges.push(Edge {
                from,
                to,
                label: labels[t].clone(),
            });
        }
    }
    let accepting: Vec<usize> = order
        .iter()
        .enumerate()
        .filter_map(|(id, st)| match st {
            Some((q, 0)) if in_set(*q, 0) => Some(id),
            _ => None,
        })
        .collect();
    Nba::new(order.len(), vec![0], accepting, edges)
        .expect("tableau construction yields consistent labels")
}
