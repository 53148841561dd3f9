mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{brute, fixtures};
use tempofleet::par::Execution;
use tempofleet::ts::{apply, build_ts, state_valid, successors, transition_cost, Action, Ts, TsState};
use tempofleet::world::Coalition;
use tempofleet::Scenario;

type EdgeSet = BTreeMap<(TsState, TsState, Vec<Action>), f64>;

fn edge_set(ts: &Ts) -> EdgeSet {
    ts.edges
        .iter()
        .map(|e| {
            let mut actions = e.actions.clone();
            actions.sort();
            ((ts.states[e.from].clone(), ts.states[e.to].clone(), actions), e.cost)
        })
        .collect()
}

#[test]
fn build_matches_brute_force_on_micro_scenarios() {
    for (name, s) in fixtures::micro_scenarios() {
        let ts = build_ts(&s, 100_000, Execution::Sequential).unwrap();
        let oracle = brute::build(&s);
        let states: BTreeSet<TsState> = ts.states.iter().cloned().collect();
        assert_eq!(states, oracle.states, "{name}: states");
        let edges = edge_set(&ts);
        assert_eq!(edges.len(), ts.num_edges(), "{name}: duplicate edges");
        assert_eq!(
            edges.keys().collect::<Vec<_>>(),
            oracle.edges.keys().collect::<Vec<_>>(),
            "{name}: transitions"
        );
        for (k, c) in &edges {
            assert!((c - oracle.edges[k]).abs() < 1e-9, "{name}: cost of {k:?}");
        }
    }
}

#[test]
fn state_validity_matches_definition_on_all_tuples() {
    for (name, s) in fixtures::micro_scenarios() {
        let valid: BTreeSet<TsState> = brute::all_valid_states(&s).into_iter().collect();
        let (n, m, k) = (s.num_robots(), s.num_objects(), s.num_regions());
        for code in 0..k.pow((n + m) as u32) * (1 << (n * m)) {
            let mut c = code;
            let mut digit = |b: usize| {
                let d = c % b;
                c /= b;
                d
            };
            let st = TsState {
                robots: (0..n).map(|_| digit(k) as u8).collect(),
                objects: (0..m).map(|_| digit(k) as u8).collect(),
                grasp: (0..m).map(|_| digit(1 << n) as Coalition).collect(),
            };
            assert_eq!(state_valid(&st, &s), valid.contains(&st), "{name}: {st:?}");
        }
    }
}

#[test]
fn single_robot_two_regions() {
    let s = fixtures::n1_m0_k2();
    let ts = build_ts(&s, 100, Execution::Sequential).unwrap();
    assert_eq!((ts.num_states(), ts.num_edges()), (2, 4));
    let out = successors(&TsState::initial(&s), &s);
    assert_eq!(out.len(), 2);
    assert!(out[0].actions.iter().all(Action::is_stay));
    assert_eq!(out[0].cost, 0.0);
}

#[test]
fn validity_examples() {
    let s = fixtures::case1();
    assert!(state_valid(&TsState::initial(&s), &s));
    let s = fixtures::n1_m1_k2();
    let split = TsState { robots: vec![0], objects: vec![1], grasp: vec![1] };
    assert!(!state_valid(&split, &s));
    let many = Scenario::from_json(&format!(
        r#"{{"workspace": {{"center": [0, 0], "radius": 200}},
            "regions": [{{"id": "π1", "center": [-150, 0], "radius": 4}}, {{"id": "π2", "center": [50, 0], "radius": 100}}],
            "robots": [{}]}}"#,
        vec![r#"{"radius": 2, "power": 1, "mass": 1, "init_region": "π2"}"#; 30].join(",")
    ))
    .unwrap();
    let crowded = TsState { robots: vec![0; 30], objects: vec![], grasp: vec![] };
    assert!(!state_valid(&crowded, &many));
}

#[test]
fn grasp_is_offered_but_not_transport_of_a_free_object() {
    let s = fixtures::n1_m1_k2();
    let out = successors(&TsState::initial(&s), &s);
    assert!(out.iter().any(|t| t.actions.contains(&Action::Grasp { robot: 0, object: 0 })));
    assert!(!out.iter().flat_map(|t| &t.actions).any(|a| matches!(a, Action::Transport { .. })));
}

#[test]
fn coalition_transport_is_offered() {
    let s = fixtures::case1();
    // robots 1 and 3 hold object 2 in π1
    let st = TsState { robots: vec![0, 2, 0], objects: vec![1, 0], grasp: vec![0, 0b101] };
    assert!(state_valid(&st, &s));
    let want = Action::Transport { object: 1, coalition: 0b101, from: 0, to: 3 };
    assert!(successors(&st, &s).iter().any(|t| t.actions.contains(&want)));
}

#[test]
fn costs_are_center_distances() {
    let s = fixtures::case1();
    let one = [Action::Navigate { robot: 0, from: 0, to: 1 }];
    let expect = (12.0f64 * 12.0 + 120.0 * 120.0).sqrt();
    assert!((transition_cost(&one, &s) - expect).abs() < 1e-12);
    let two = [one[0].clone(), Action::Navigate { robot: 1, from: 0, to: 1 }];
    assert!((transition_cost(&two, &s) - 2.0 * expect).abs() < 1e-12);
    assert_eq!(transition_cost(&[Action::Stay { robot: 0 }], &s), 0.0);
}

#[test]
fn every_edge_is_closed_and_reproducible() {
    let s = fixtures::case1();
    let ts = build_ts(&s, 1_000_000, Execution::default()).unwrap();
    log::info!("case 1: {} states, {} transitions", ts.num_states(), ts.num_edges());
    for e in &ts.edges {
        let src = &ts.states[e.from];
        assert!(state_valid(&ts.states[e.to], &s));
        assert_eq!(apply(src, &e.actions), ts.states[e.to]);
        // one atom per robot; a transport covers its whole coalition
        let covered: u32 = e
            .actions
            .iter()
            .map(|a| match a {
                Action::Transport { coalition, .. } => coalition.count_ones(),
                _ => 1,
            })
            .sum();
        assert_eq!(covered as usize, s.num_robots());
    }
}

#[test]
fn build_is_deterministic_across_strategies() {
    let s = fixtures::case1();
    let a = build_ts(&s, 1_000_000, Execution::Sequential).unwrap();
    let b = build_ts(&s, 1_000_000, Execution::Parallel).unwrap();
    assert_eq!(a.states, b.states);
    assert_eq!(a.edges, b.edges);
}

#[test]
fn budget_is_enforced() {
    let s = fixtures::case1();
    assert!(build_ts(&s, 10, Execution::Sequential).is_err());
}

fn swap_robots(st: &TsState) -> TsState {
    let swap_bits = |c: Coalition| (c & !0b11) | (c & 1) << 1 | (c >> 1 & 1);
    TsState {
        robots: vec![st.robots[1], st.robots[0]],
        objects: st.objects.clone(),
        grasp: st.grasp.iter().map(|&c| swap_bits(c)).collect(),
    }
}

#[test]
fn relabeling_identical_robots_gives_an_isomorphic_system() {
    let base = r#"{
        "workspace": {"center": [0, 0], "radius": 40},
        "regions": [
            {"id": "π1", "center": [-15, 0], "radius": 4},
            {"id": "π2", "center": [15, 0], "radius": 4},
            {"id": "π3", "center": [0, 20], "radius": 1.2}
        ],
        "robots": [
            {"radius": 0.75, "power": 2, "mass": 1, "init_region": "A"},
            {"radius": 0.75, "power": 2, "mass": 1, "init_region": "B"}
        ],
        "objects": [{"radius": 0.2, "required_power": 4, "mass": 0.25, "init_region": "π1"}]
    }"#;
    let a = Scenario::from_json(&base.replace("\"A\"", "\"π1\"").replace("\"B\"", "\"π2\"")).unwrap();
    let b = Scenario::from_json(&base.replace("\"A\"", "\"π2\"").replace("\"B\"", "\"π1\"")).unwrap();
    let ta = build_ts(&a, 100_000, Execution::Sequential).unwrap();
    let tb = build_ts(&b, 100_000, Execution::Sequential).unwrap();
    let mapped: BTreeSet<TsState> = ta.states.iter().map(swap_robots).collect();
    assert_eq!(mapped, tb.states.iter().cloned().collect());
    let canon = |ts: &Ts, map: &dyn Fn(&TsState) -> TsState| -> BTreeSet<(TsState, TsState, u64)> {
        ts.edges
            .iter()
            .map(|e| (map(&ts.states[e.from]), map(&ts.states[e.to]), e.cost.to_bits()))
            .collect()
    };
    assert_eq!(canon(&ta, &swap_robots), canon(&tb, &|s| s.clone()));
}
