//! Small scenarios shared by the integration and acceptance tests.

use std::path::PathBuf;

use tempofleet::Scenario;

fn scenario(json: &str) -> Scenario {
    Scenario::from_json(json).expect("fixture scenario is valid")
}

/// One robot, no objects, two regions 20 m apart.
pub fn n1_m0_k2() -> Scenario {
    scenario(
        r#"{
        "workspace": {"center": [0, 0], "radius": 30},
        "regions": [
            {"id": "π1", "center": [-10, 0], "radius": 4},
            {"id": "π2", "center": [10, 0], "radius": 4}
        ],
        "robots": [{"radius": 0.75, "power": 2, "mass": 1, "init_region": "π1"}]
    }"#,
    )
}

/// One robot able to carry the one object, both starting in π1.
pub fn n1_m1_k2() -> Scenario {
    scenario(
        r#"{
        "workspace": {"center": [0, 0], "radius": 30},
        "regions": [
            {"id": "π1", "center": [-10, 0], "radius": 4},
            {"id": "π2", "center": [10, 0], "radius": 4}
        ],
        "robots": [{"radius": 0.75, "power": 2, "mass": 1, "init_region": "π1"}],
        "objects": [{"radius": 0.2, "required_power": 1, "mass": 0.25, "init_region": "π1"}]
    }"#,
    )
}

/// Two robots that must cooperate to move the object; π3 holds one robot or
/// the bare object plus one robot, but neither two robots nor a coupled entity.
pub fn n2_m1_k3() -> Scenario {
    scenario(
        r#"{
        "workspace": {"center": [0, 0], "radius": 40},
        "regions": [
            {"id": "π1", "center": [-15, 0], "radius": 4},
            {"id": "π2", "center": [15, 0], "radius": 4},
            {"id": "π3", "center": [0, 20], "radius": 1.2}
        ],
        "robots": [
            {"radius": 0.75, "power": 2, "mass": 1, "init_region": "π1"},
            {"radius": 0.75, "power": 3, "mass": 1, "init_region": "π2"}
        ],
        "objects": [{"radius": 0.2, "required_power": 4, "mass": 0.25, "init_region": "π1"}]
    }"#,
    )
}

pub fn micro_scenarios() -> Vec<(&'static str, Scenario)> {
    vec![("N1/M0/K2", n1_m0_k2()), ("N1/M1/K2", n1_m1_k2()), ("N2/M1/K3", n2_m1_k3())]
}

/// Micro scenarios paired with tasks, feasible and infeasible.
pub fn planning_tasks() -> Vec<(Scenario, &'static str)> {
    vec![
        (n1_m0_k2(), r#"G F "1-π1" & G F "1-π2""#),
        (n1_m0_k2(), r#"F G "1-π2""#),
        (n1_m0_k2(), r#"G "1-π1""#),
        (n1_m0_k2(), r#""1-π2""#),
        (n1_m1_k2(), r#"G F "O1-π2" & G F "O1-π1""#),
        (n1_m1_k2(), r#"F "O1-π2" & G F "1-π1""#),
        (n2_m1_k3(), r#"F "O1-π2" & G F "1-π3""#),
        (n2_m1_k3(), r#"G F ("2-π3" & "O1-π1") & G F "O1-π2""#),
        (n2_m1_k3(), r#"G !"1-π2" & F "O1-π2""#),
    ]
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// The three-robot, two-object scenario with four regions.
pub fn case1() -> Scenario {
    Scenario::load(scenarios_dir().join("case1.json")).expect("case1.json loads")
}

pub fn case1_formula() -> String {
    std::fs::read_to_string(scenarios_dir().join("case1.ltl"))
        .expect("case1.ltl exists")
        .trim()
        .to_string()
}
