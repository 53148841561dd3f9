//! Linear temporal logic: syntax, normal form, Büchi translation and lasso semantics.

mod lasso;
mod nba;
mod parse;
mod tableau;

use std::fmt;

pub use lasso::{eval_lasso, LassoWord, Letter};
pub use nba::{nba_accepts_lasso, Edge, EncodedLetter, Label, LassoAcceptor, Nba, NbaError, StateId};
pub use parse::{parse_formula, parse_ltl, ParseError};
pub use tableau::translate;

/// LTL abstract syntax tree.
///
/// `False` and `Release` do not need surface syntax of their own but are
/// accepted by the parser (`false`, `R`) so every tree prints and reparses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Self {
        Formula::Next(Box::new(self))
    }

    pub fn until(self, rhs: Formula) -> Self {
        Formula::Until(Box::new(self), Box::new(rhs))
    }

    pub fn release(self, rhs: Formula) -> Self {
        Formula::Release(Box::new(self), Box::new(rhs))
    }

    pub fn eventually(self) -> Self {
        Formula::Eventually(Box::new(self))
    }

    pub fn always(self) -> Self {
        Formula::Always(Box::new(self))
    }

    pub fn implies(self, rhs: Formula) -> Self {
        self.not().or(rhs)
    }

    /// Conjunction of all formulas; `true` for an empty iterator.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Conjunction of the given atoms, i.e. "all of these hold now".
    pub fn all_of<S: AsRef<str>>(atoms: impl IntoIterator<Item = S>) -> Self {
        Formula::conjunction(atoms.into_iter().map(|a| Formula::atom(a.as_ref())))
    }

    /// Nesting depth; leaves count as 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::Eventually(a)
            | Formula::Always(a) => 1 + a.depth(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Atom names occurring in the formula, sorted and deduplicated.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a.clone()),
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::Eventually(a)
            | Formula::Always(a) => a.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// True when negations occur only directly above atoms and the derived
    /// operators `F`/`G` have been eliminated.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(a) => matches!(**a, Formula::Atom(_)),
            Formula::Next(a) => a.is_nnf(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => a.is_nnf() && b.is_nnf(),
            Formula::Eventually(_) | Formula::Always(_) => false,
        }
    }
}

/// Pushes negations down to atoms and rewrites `F`/`G` into `U`/`R`.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, negated: bool) -> Formula {
    use Formula::*;
    match (f, negated) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Atom(a), false) => Atom(a.clone()),
        (Atom(a), true) => Atom(a.clone()).not(),
        (Not(a), _) => nnf(a, !negated),
        (And(a, b), false) => nnf(a, false).and(nnf(b, false)),
        (And(a, b), true) => nnf(a, true).or(nnf(b, true)),
        (Or(a, b), false) => nnf(a, false).or(nnf(b, false)),
        (Or(a, b), true) => nnf(a, true).and(nnf(b, true)),
        (Next(a), _) => nnf(a, negated).next(),
        (Until(a, b), false) => nnf(a, false).until(nnf(b, false)),
        (Until(a, b), true) => nnf(a, true).release(nnf(b, true)),
        (Release(a, b), false) => nnf(a, false).release(nnf(b, false)),
        (Release(a, b), true) => nnf(a, true).until(nnf(b, true)),
        (Eventually(a), false) => True.until(nnf(a, false)),
        (Eventually(a), true) => False.release(nnf(a, true)),
        (Always(a), false) => False.release(nnf(a, false)),
        (Always(a), true) => True.until(nnf(a, true)),
    }
}

// Binding strength used by the printer; mirrors the parser's precedence.
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Until(..) | Formula::Release(..) => 3,
        _ => 4,
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Binary operands are wrapped whenever they bind no tighter than the
        // parent, which keeps the printed tree unambiguous for any associativity.
        let child = |f: &mut fmt::Formatter<'_>, c: &Formula, parent: u8| -> fmt::Result {
            if precedence(c) <= parent {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        };
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "\"{a}\""),
            Formula::Not(a) => {
                write!(f, "!")?;
                child(f, a, 3)
            }
            Formula::Next(a) => {
                write!(f, "X ")?;
                child(f, a, 3)
            }
            Formula::Eventually(a) => {
                write!(f, "F ")?;
                child(f, a, 3)
            }
            Formula::Always(a) => {
                write!(f, "G ")?;
                child(f, a, 3)
            }
            Formula::And(a, b) => {
                child(f, a, 2)?;
                write!(f, " & ")?;
                child(f, b, 2)
            }
            Formula::Or(a, b) => {
                child(f, a, 1)?;
                write!(f, " | ")?;
                child(f, b, 1)
            }
            Formula::Until(a, b) => {
                child(f, a, 3)?;
                write!(f, " U ")?;
                child(f, b, 3)
            }
            Formula::Release(a, b) => {
                child(f, a, 3)?;
                write!(f, " R ")?;
                child(f, b, 3)
            }
        }
    }
}
