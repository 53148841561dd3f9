//! Product of the transition system with a Büchi automaton, prefix-suffix
//! plans, and an exact (Dijkstra-based) planner.

mod exact;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{nba_accepts_lasso, LassoWord, Nba, StateId};
use crate::ts::{format_actions, successors, TsState, TsTransition};
use crate::world::Scenario;

pub use exact::{exact_plan, exact_plan_on, ExactOptions};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductState {
    pub ts: TsState,
    pub nba: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("initial state is invalid")]
    InvalidInitial,
    #[error("state budget of {0} exceeded")]
    Budget(usize),
}

/// Successors of a product state. NBA edges are matched against the label of
/// the *source* TS state; the cost is the TS transition's cost.
pub fn product_successors(p: &ProductState, nba: &Nba, s: &Scenario) -> Vec<(ProductState, TsTransition)> {
    let letter = nba.encode(p.ts.label(s));
    let next_q: Vec<StateId> = nba.successors(p.nba, &letter).collect();
    if next_q.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for t in successors(&p.ts, s) {
        for &q in &next_q {
            out.push((
                ProductState {
                    ts: t.target.clone(),
                    nba: q,
                },
                t.clone(),
            ));
        }
    }
    out
}

/// A finite prefix followed by a suffix cycle repeated forever.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixSuffixPlan {
    pub prefix: Vec<TsTransition>,
    pub suffix: Vec<TsTransition>,
}

impl PrefixSuffixPlan {
    pub fn prefix_cost(&self) -> f64 {
        self.prefix.iter().map(|t| t.cost).sum()
    }

    pub fn suffix_cost(&self) -> f64 {
        self.suffix.iter().map(|t| t.cost).sum()
    }

    pub fn cost(&self) -> f64 {
        self.prefix_cost() + self.suffix_cost()
    }

    /// First state of the suffix cycle.
    pub fn loop_state(&self) -> &TsState {
        &self.suffix[0].source
    }

    /// `L(s₀) … L(s_{p-1}) (L(s_p) … L(s_{p+c-1}))^ω`.
    pub fn trace(&self, s: &Scenario) -> LassoWord {
        LassoWord::new(
            self.prefix.iter().map(|t| t.source.label_set(s)).collect(),
            self.suffix.iter().map(|t| t.source.label_set(s)).collect(),
        )
    }

    /// Action table with one row per visited state; suffix rows are starred.
    pub fn table(&self, s: &Scenario) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} | actions", "step");
        let _ = writeln!(out, "{:-<6}-+-{:-<40}", "", "");
        let _ = writeln!(out, "{:<6} | -", "1");
        for (n, t) in self.prefix.iter().chain(&self.suffix).enumerate() {
            let star = if n >= self.prefix.len() { "*" } else { "" };
            let _ = writeln!(out, "{:<6} | {}", format!("{}{star}", n + 2), format_actions(&t.actions, s));
        }
        let _ = writeln!(
            out,
            "cost {:.6} (prefix {:.6}, suffix {:.6})",
            self.cost(),
            self.prefix_cost(),
            self.suffix_cost()
        );
        out
    }
}

/// Structural and semantic check of a plan: the prefix starts at the initial
/// state, consecutive transitions chain, every transition is one the TS
/// offers (same actions, target and cost), the suffix closes on itself, and
/// the trace is accepted by `nba`.
pub fn verify_plan(plan: &PrefixSuffixPlan, nba: &Nba, s: &Scenario) -> bool {
    if plan.suffix.is_empty() {
        return false;
    }
    let init = TsState::initial(s);
    let all: Vec<&TsTransition> = plan.prefix.iter().chain(&plan.suffix).collect();
    if all[0].source != init {
        return false;
    }
    if all.windows(2).any(|w| w[0].target != w[1].source) {
        return false;
    }
    if plan.suffix.last().unwrap().target != plan.suffix[0].source {
        return false;
    }
    let offered = |t: &TsTransition| {
        successors(&t.source, s)
            .iter()
            .any(|u| u.actions == t.actions && u.target == t.target && u.cost == t.cost)
    };
    if !all.iter().all(|t| offered(t)) {
        return false;
    }
    nba_accepts_lasso(nba, &plan.trace(s))
}
