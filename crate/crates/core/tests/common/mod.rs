//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

pub mod brute;
pub mod fixtures;
pub mod worlds;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use tempofleet::ltl::{Formula, LassoWord, Letter};

/// Every NNF formula over `atoms` whose depth is at most `depth`, counting
/// literals (`a`, `!a`) as depth 1.
pub fn nnf_formulas(atoms: &[&str], depth: usize) -> Vec<Formula> {
    let mut by_depth: Vec<Vec<Formula>> = Vec::new();
    let mut leaves = vec![Formula::True, Formula::False];
    for a in atoms {
        leaves.push(Formula::atom(*a));
        leaves.push(Formula::atom(*a).not());
    }
    by_depth.push(leaves);
    for d in 1..depth {
        let below: Vec<&Formula> = by_depth.iter().flatten().collect();
        let prev = &by_depth[d - 1];
        let mut layer: Vec<Formula> = prev.iter().map(|f| f.clone().next()).collect();
        for (i, x) in below.iter().enumerate() {
            for (j, y) in below.iter().enumerate() {
                // at least one child must sit exactly one level below
                let fresh = |k: usize| k >= below.len() - prev.len();
                if !fresh(i) && !fresh(j) {
                    continue;
                }
                let (x, y) = ((*x).clone(), (*y).clone());
                layer.push(x.clone().and(y.clone()));
                layer.push(x.clone().or(y.clone()));
                layer.push(x.clone().until(y.clone()));
                layer.push(x.release(y));
            }
        }
        by_depth.push(layer);
    }
    by_depth.into_iter().flatten().collect()
}

fn letters(atoms: &[&str]) -> Vec<Letter> {
    (0..1usize << atoms.len())
        .map(|bits| {
            atoms
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, a)| a.to_string())
                .collect()
        })
        .collect()
}

fn sequences(alphabet: &[Letter], max_len: usize, min_len: usize) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for len in 0..=max_len {
        if len >= min_len {
            out.extend(layer.iter().cloned());
        }
        layer = layer
            .iter()
            .flat_map(|s| {
                alphabet.iter().map(move |l| {
                    let mut t = s.clone();
                    t.push(l.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// All lasso words with `|prefix| <= max_prefix` and `1 <= |cycle| <= max_cycle`.
pub fn lasso_words(atoms: &[&str], max_prefix: usize, max_cycle: usize) -> Vec<LassoWord> {
    let alphabet = letters(atoms);
    let prefixes = sequences(&alphabet, max_prefix, 0);
    let cycles = sequences(&alphabet, max_cycle, 1);
    let mut out = Vec::new();
    for c in &cycles {
        for p in &prefixes {
            out.push(LassoWord::new(p.clone(), c.clone()));
        }
    }
    out
}

/// Random formula (not necessarily NNF) of depth at most `depth`.
pub fn random_formula(rng: &mut dyn RngCore, atoms: &[&str], depth: usize) -> Formula {
    if depth <= 1 || rng.random_bool(0.2) {
        return match rng.random_range(0..4u32) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(*atoms.choose(rng).unwrap()),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..9u32) {
        0 => random_formula(rng, atoms, d).not(),
        1 => random_formula(rng, atoms, d).next(),
        2 => random_formula(rng, atoms, d).eventually(),
        3 => random_formula(rng, atoms, d).always(),
        k => {
            let x = random_formula(rng, atoms, d);
            let y = random_formula(rng, atoms, d);
            match k {
                4 => x.and(y),
                5 => x.or(y),
                6 => x.until(y),
                7 => x.release(y),
                _ => x.implies(y),
            }
        }
    }
}

pub fn random_word(rng: &mut dyn RngCore, atoms: &[&str], max_prefix: usize, max_cycle: usize) -> LassoWord {
    let letter = |rng: &mut dyn RngCore| -> Letter {
        atoms
            .iter()
            .filter(|_| rng.random_bool(0.5))
            .map(|a| a.to_string())
            .collect()
    };
    let p = rng.random_range(0..=max_prefix);
    let c = rng.random_range(1..=max_cycle);
    let prefix = (0..p).map(|_| letter(rng)).collect();
    let cycle = (0..c).map(|_| letter(rng)).collect();
    LassoWord::new(prefix, cycle)
}
