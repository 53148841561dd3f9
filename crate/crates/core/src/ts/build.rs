use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{format_actions, state_valid, successors, Action, TsState};
use crate::par::{self, Execution};
use crate::world::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TsError {
    #[error("initial state is invalid")]
    InvalidInitial,
    #[error("state budget of {0} exceeded")]
    Budget(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TsEdge {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
    pub actions: Vec<Action>,
}

/// Explicit transition system; state 0 is the initial state and states are
/// numbered in breadth-first discovery order.
#[derive(Clone, Debug)]
pub struct Ts {
    pub states: Vec<TsState>,
    pub edges: Vec<TsEdge>,
    index: HashMap<TsState, usize>,
    /// Edges leaving state `s` are `edges[out[s]..out[s + 1]]`.
    out: Vec<usize>,
}

impl Ts {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn id(&self, s: &TsState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn out_edges(&self, s: usize) -> &[TsEdge] {
        &self.edges[self.out_range(s)]
    }

    /// Indices into `edges` of the transitions leaving `s`.
    pub fn out_range(&self, s: usize) -> std::ops::Range<usize> {
        self.out[s]..self.out[s + 1]
    }

    /// Text export: a state table followed by `src -> dst : cost : actions`.
    pub fn export(&self, s: &Scenario) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states {}", self.states.len());
        for (id, st) in self.states.iter().enumerate() {
            let region = |k: &u8| s.regions[*k as usize].id.clone();
            let robots: Vec<String> = st.robots.iter().map(region).collect();
            let objects: Vec<String> = st.objects.iter().map(region).collect();
            let grasp: Vec<String> = st
                .grasp
                .iter()
                .map(|&c| {
                    let m: Vec<String> = crate::world::members(c).map(|i| (i + 1).to_string()).collect();
                    format!("{{{}}}", m.join(","))
                })
                .collect();
            let _ = writeln!(
                out,
                "{id}: robots [{}] objects [{}] grasp [{}]",
                robots.join(" "),
                objects.join(" "),
                grasp.join(" ")
            );
        }
        let _ = writeln!(out, "transitions {}", self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} -> {} : {:.6} : {}", e.from, e.to, e.cost, format_actions(&e.actions, s));
        }
        out
    }
}

/// Breadth-first closure of [`successors`] from the initial state.
///
/// Each BFS level is expanded in parallel under [`Execution::Parallel`]; ids
/// are assigned afterwards in (frontier order, successor order), so the result
/// does not depend on the strategy.
pub fn build_ts(s: &Scenario, max_states: usize, exec: Execution) -> Result<Ts, TsError> {
    let init = TsState::initial(s);
    if !state_valid(&init, s) {
        return Err(TsError::InvalidInitial);
    }
    let mut states = vec![init.clone()];
    let mut index = HashMap::from([(init, 0usize)]);
    let mut edges = Vec::new();
    let mut out = vec![0];
    let mut frontier = 0..1;
    while !frontier.is_empty() {
        let level: Vec<TsState> = states[frontier.clone()].to_vec();
        let expanded = par::map(exec, &level, |st| successors(st, s));
        let from0 = frontier.start;
        for (offset, succ) in expanded.into_iter().enumerate() {
            for t in succ {
                let to = match index.get(&t.target) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= max_states {
                            return Err(TsError::Budget(max_states));
                        }
                        let id = states.len();
                        index.insert(t.target.clone(), id);
                        states.push(t.target);
                        id
                    }
                };
                edges.push(TsEdge {
                    from: from0 + offset,
                    to,
                    cost: t.cost,
                    actions: t.actions,
                });
            }
            out.push(edges.len());
        }
        frontier = frontier.end..states.len();
    }
    Ok(Ts {
        states,
        edges,
        index,
        out,
    })
}
