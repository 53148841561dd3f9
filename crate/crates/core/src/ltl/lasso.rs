use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Formula;

/// One position of a word: the set of atoms that hold there.
pub type Letter = BTreeSet<String>;

/// Ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoWord {
    pub prefix: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl LassoWord {
    /// Panics if `cycle` is empty.
    pub fn new(prefix: Vec<Letter>, cycle: Vec<Letter>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        LassoWord { prefix, cycle }
    }

    /// Builds a word from letters given as slices of atom names.
    pub fn from_atoms(prefix: &[&[&str]], cycle: &[&[&str]]) -> Self {
        let conv = |ls: &[&[&str]]| -> Vec<Letter> {
            ls.iter()
                .map(|l| l.iter().map(|s| s.to_string()).collect())
                .collect()
        };
        LassoWord::new(conv(prefix), conv(cycle))
    }

    /// Number of distinct positions (distinct suffixes) of the word.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, i: usize) -> &Letter {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[i - self.prefix.len()]
        }
    }

    /// Position following `i`; the last position loops back to the cycle start.
    pub fn succ(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.prefix.len()
        }
    }
}

/// Decides `w ⊨ f` by computing, for every subformula, the set of positions of
/// the finitely many distinct suffixes of `w` at which it holds.
///
/// Until and eventually are least fixpoints, release and always greatest
/// fixpoints of their one-step unfoldings.
pub fn eval_lasso(f: &Formula, w: &LassoWord) -> bool {
    sat(f, w)[0]
}

fn fixpoint(w: &LassoWord, init: bool, step: impl Fn(usize, &[bool]) -> bool) -> Vec<bool> {
    let n = w.len();
    let mut cur = vec![init; n];
    loop {
        let mut changed = false;
        // Sweeping backwards propagates along the successor chain in one pass
        // for the prefix; the cycle may need a second pass.
        for i in (0..n).rev() {
            let v = step(i, &cur);
            if v != cur[i] {
                cur[i] = v;
                changed = true;
            }
        }
        if !changed {
            return cur;
        }
    }
}

fn sat(f: &Formula, w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(a) => (0..n).map(|i| w.letter(i).contains(a)).collect(),
        Formula::Not(a) => sat(a, w).into_iter().map(|v| !v).collect(),
        Formula::And(a, b) => {
            let (x, y) = (sat(a, w), sat(b, w));
            x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
        }
        Formula::Or(a, b) => {
            let (x, y) = (sat(a, w), sat(b, w));
            x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
        }
        Formula::Next(a) => {
            let x = sat(a, w);
            (0..n).map(|i| x[w.succ(i)]).collect()
        }
        Formula::Until(a, b) => {
            let (x, y) = (sat(a, w), sat(b, w));
            fixpoint(w, false, |i, cur| y[i] || (x[i] && cur[w.succ(i)]))
        }
        Formula::Release(a, b) => {
            let (x, y) = (sat(a, w), sat(b, w));
            fixpoint(w, true, |i, cur| y[i] && (x[i] || cur[w.succ(i)]))
        }
        Formula::Eventually(a) => {
            let x = sat(a, w);
            fixpoint(w, false, |i, cur| x[i] || cur[w.succ(i)])
        }
        Formula::Always(a) => {
            let x = sat(a, w);
            fixpoint(w, true, |i, cur| x[i] && cur[w.succ(i)])
        }
    }
}
