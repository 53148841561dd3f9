//! Plans a scenario exactly, executes two laps of the suffix and checks the
//! resulting behavior.
//!
//! `cargo run --release --example plan_and_execute -- scenarios/case1.json scenarios/case1.ltl`

use tempofleet::executor::{execute_plan, verify_behavior, ExecOptions, Task};
use tempofleet::ltl::{parse_formula, translate};
use tempofleet::product::{exact_plan, ExactOptions};
use tempofleet::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let (Some(scenario), Some(formula)) = (args.next(), args.next()) else {
        return Err("usage: plan_and_execute <scenario.json> <formula.ltl> [timeout-seconds]".into());
    };
    let s = Scenario::load(scenario)?;
    let f = parse_formula(std::fs::read_to_string(formula)?.trim())?;
    let nba = translate(&f);
    let plan = exact_plan(&s, &nba, ExactOptions::default())?.ok_or("task is infeasible")?;
    println!("{}", plan.table(&s));
    let mut opts = ExecOptions::for_scenario(&s);
    if let Some(t) = args.next() {
        opts.params.timeout = t.parse()?;
    }
    let report = execute_plan(&plan, &s, &opts)?;
    for m in report.motions() {
        println!(
            "{:<28} {} -> {}  t0 {:8.1}  {:6.1} s  clearance {:.3}  m̂ {:.3}  α̂ {:.3}",
            m.entity, m.from, m.to, m.started_at, m.duration, m.min_clearance, m.max_m_hat, m.max_alpha_hat
        );
    }
    println!("total {:.1} s, behavior satisfies task: {}", report.total_time(), verify_behavior(&report, &s, &Task::global(f)));
    Ok(())
}
