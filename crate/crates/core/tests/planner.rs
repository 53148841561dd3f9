mod common;

use common::fixtures;
use proptest::prelude::*;
use tempofleet::ltl::{parse_ltl, translate};
use tempofleet::par::Execution;
use tempofleet::planner::{grow_prefix_tree, plan_sampling, PlannerParams};
use tempofleet::product::{exact_plan, verify_plan, ExactOptions};
use tempofleet::{Nba, Scenario};

fn nba(s: &Scenario, text: &str) -> Nba {
    translate(&parse_ltl(text, &s.atom_universe()).unwrap())
}

fn params(n_max: usize, seed: u64) -> PlannerParams {
    PlannerParams { n_max, seed, ..Default::default() }
}

#[test]
fn sampling_reaches_the_exact_optimum_on_micro_tasks() {
    for (s, text) in fixtures::planning_tasks() {
        let a = nba(&s, text);
        let exact = exact_plan(&s, &a, ExactOptions::default()).unwrap();
        let sampled = plan_sampling(&s, &a, &params(5_000, 7)).unwrap();
        match (exact, sampled) {
            (None, None) => {}
            (Some(e), Some(p)) => {
                assert!(verify_plan(&p, &a, &s), "{text}");
                assert!((p.cost() - e.cost()).abs() < 1e-9, "{text}: {} vs {}", p.cost(), e.cost());
            }
            (e, p) => panic!("{text}: exact {:?}, sampling {:?}", e.map(|x| x.cost()), p.map(|x| x.cost())),
        }
    }
}

#[test]
fn fixed_seed_is_deterministic() {
    let s = fixtures::case1();
    let a = nba(&s, r#"G F "O1-π3" & G F "O2-π2""#);
    let run = |exec| {
        let p = PlannerParams { exec, ..params(3_000, 11) };
        plan_sampling(&s, &a, &p).unwrap()
    };
    let first = run(Execution::Sequential);
    assert_eq!(first, run(Execution::Sequential));
    assert_eq!(first, run(Execution::Parallel));
}

#[test]
fn prefix_tree_keeps_its_invariants() {
    let s = fixtures::case1();
    let a = nba(&s, r#"G F "O1-π3""#);
    let (tree, accepting) = grow_prefix_tree(&s, &a, &params(4_000, 3)).unwrap();
    tree.check_invariants().unwrap();
    assert!(tree.len() > 1);
    for &id in &accepting {
        assert!(a.is_accepting(tree.state(id).nba));
        let path = tree.path(id, &s);
        let cost: f64 = path.iter().map(|t| t.cost).sum();
        assert!((cost - tree.cost(id)).abs() < 1e-9);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(params(0, 0).validate().is_err());
    assert!(PlannerParams { bias: 1.5, ..Default::default() }.validate().is_err());
    assert!(PlannerParams::default().validate().is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_plans_are_valid_and_never_beat_the_optimum(seed in any::<u64>(), bias in 0.0f64..1.0, task in 0usize..9) {
        let (s, text) = fixtures::planning_tasks().swap_remove(task);
        let a = nba(&s, text);
        let p = PlannerParams { bias, ..params(400, seed) };
        if let Some(plan) = plan_sampling(&s, &a, &p).unwrap() {
            prop_assert!(verify_plan(&plan, &a, &s));
            let best = exact_plan(&s, &a, ExactOptions::default()).unwrap().unwrap();
            prop_assert!(plan.cost() >= best.cost() - 1e-9);
        }
    }
}
