//! `tempofleet`: translate formulas, build transition systems, plan, simulate
//! and verify multi-robot transport tasks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use tempofleet::control::svg_plot;
use tempofleet::executor::{execute_plan, verify_behavior, ExecOptions, ExecutionReport, Task};
use tempofleet::ltl::{parse_ltl, translate, Formula};
use tempofleet::par::Execution;
use tempofleet::planner::{plan_sampling, PlannerParams};
use tempofleet::product::{exact_plan, verify_plan, ExactOptions, PlanError, PrefixSuffixPlan};
use tempofleet::ts::build_ts;
use tempofleet::Scenario;

/// Exit codes besides 0 (success) and 1 (I/O and other failures).
mod code {
    pub const PARSE: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const BUDGET: u8 = 4;
    pub const SIMULATION: u8 = 5;
    pub const VERIFICATION: u8 = 6;
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "tempofleet", version, about = "Temporal-logic planning and adaptive control for multi-robot object transport")]
struct Cli {
    /// Worker threads for parallel loops; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate an LTL formula into a Büchi automaton.
    Translate {
        #[command(flatten)]
        formulas: FormulaArgs,
        /// Directory for `nba.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the transition system of a scenario.
    BuildTs {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        /// Directory for `ts.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a prefix-suffix plan.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        formulas: FormulaArgs,
        #[command(flatten)]
        planner: PlannerArgs,
        /// Directory for `plan.json` and `plan.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan (or load a plan) and execute it in the continuous layer.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        formulas: FormulaArgs,
        /// Previously written `plan.json`; planned from the formulas if absent.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[command(flatten)]
        planner: PlannerArgs,
        #[arg(long, default_value_t = 2)]
        suffix_reps: usize,
        /// Integration step (s); defaults to the scenario's control settings.
        #[arg(long)]
        dt: Option<f64>,
        /// Simulated seconds allowed per motion.
        #[arg(long)]
        timeout: Option<f64>,
        /// Directory for `report.json` and per-motion CSV logs.
        #[arg(long)]
        out: PathBuf,
        /// Also write `trajectories.svg`.
        #[arg(long)]
        plot: bool,
    },
    /// Check a plan against the formulas and, optionally, an executed report.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        formulas: FormulaArgs,
        #[arg(long)]
        plan: PathBuf,
        /// `report.json` written by `simulate`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Task formulas; `@path` reads a formula from a file.
#[derive(Args)]
struct FormulaArgs {
    /// Global formula (repeatable; all are conjoined).
    #[arg(long)]
    formula: Vec<String>,
    /// Formula of one robot as `ID=FORMULA`, with 1-based IDs.
    #[arg(long)]
    robot_formula: Vec<String>,
    /// Formula of one object as `ID=FORMULA`, with 1-based IDs.
    #[arg(long)]
    object_formula: Vec<String>,
}

#[derive(Args)]
struct PlannerArgs {
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Sampling iterations per tree.
    #[arg(long, default_value_t = 100_000)]
    n_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of expanding the newest tree node.
    #[arg(long, default_value_t = 0.3)]
    bias: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Sampling,
}

#[derive(Serialize, Deserialize)]
struct SimulationOutput {
    verdict: bool,
    report: ExecutionReport,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TEMPOFLEET_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let exec = configure_jobs(cli.jobs)?;
    match cli.command {
        Command::Translate { formulas, out } => {
            let f = formulas.task(None)?.conjunction();
            let t = Instant::now();
            let nba = translate(&f);
            println!(
                "states {}, transitions {}, accepting {}, {:.3} s",
                nba.num_states(),
                nba.num_edges(),
                nba.accepting_states().len(),
                t.elapsed().as_secs_f64()
            );
            if let Some(dir) = out {
                write(&dir, "nba.txt", &nba.export())?;
            }
        }
        Command::BuildTs { scenario, max_states, out } => {
            let s = load_scenario(&scenario)?;
            let t = Instant::now();
            let ts = build_ts(&s, max_states, exec).map_err(|e| fail(code::BUDGET, e.into()))?;
            println!("states {}, transitions {}, {:.3} s", ts.num_states(), ts.num_edges(), t.elapsed().as_secs_f64());
            if let Some(dir) = out {
                write(&dir, "ts.txt", &ts.export(&s))?;
            }
        }
        Command::Plan { scenario, formulas, planner, out } => {
            let s = load_scenario(&scenario)?;
            let task = formulas.task(Some(&s))?;
            let plan = make_plan(&s, &task, &planner, exec)?;
            let table = plan.table(&s);
            print!("{table}");
            if let Some(dir) = out {
                write(&dir, "plan.json", &serde_json::to_string_pretty(&plan)?)?;
                write(&dir, "plan.txt", &table)?;
            }
        }
        Command::Simulate {
            scenario,
            formulas,
            plan,
            planner,
            suffix_reps,
            dt,
            timeout,
            out,
            plot,
        } => {
            let s = load_scenario(&scenario)?;
            let task = formulas.task(Some(&s))?;
            let plan = match plan {
                Some(path) => load_plan(&path, &s, &task)?,
                None => make_plan(&s, &task, &planner, exec)?,
            };
            let mut opts = ExecOptions::for_scenario(&s);
            opts.suffix_reps = suffix_reps;
            if let Some(dt) = dt {
                opts.params.dt = dt;
            }
            if let Some(t) = timeout {
                opts.params.timeout = t;
            }
            let invalid = opts.params.invalid_fields();
            if !invalid.is_empty() {
                return Err(fail(code::PARSE, anyhow!("control parameters must be positive: {}", invalid.join(", "))));
            }
            let report = execute_plan(&plan, &s, &opts).map_err(|e| fail(code::SIMULATION, e.into()))?;
            let verdict = verify_behavior(&report, &s, &task);
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for (name, log) in &report.logs {
                write(&out, &format!("{name}.csv"), &log.to_csv())?;
            }
            if plot {
                let regions: Vec<_> = s.regions.iter().map(|r| r.disk()).collect();
                let paths: Vec<_> = report.logs.iter().map(|(_, l)| l.path()).collect();
                write(&out, "trajectories.svg", &svg_plot(s.workspace, &s.obstacles, &regions, &paths))?;
            }
            for m in report.motions() {
                println!(
                    "{:>9.1} s  {:<30} {} -> {}  {:7.1} s  clearance {:.3}",
                    m.started_at, m.entity, m.from, m.to, m.duration, m.min_clearance
                );
            }
            println!("total {:.1} s, behavior satisfies task: {verdict}", report.total_time());
            let output = SimulationOutput { verdict, report };
            write(&out, "report.json", &serde_json::to_string_pretty(&output)?)?;
            if !verdict {
                return Err(fail(code::VERIFICATION, anyhow!("executed behavior violates the task")));
            }
        }
        Command::Verify { scenario, formulas, plan, report } => {
            let s = load_scenario(&scenario)?;
            let task = formulas.task(Some(&s))?;
            load_plan(&plan, &s, &task)?;
            println!("plan: ok");
            if let Some(path) = report {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let output: SimulationOutput = serde_json::from_str(&text).map_err(|e| fail(code::PARSE, e.into()))?;
                if !verify_behavior(&output.report, &s, &task) {
                    return Err(fail(code::VERIFICATION, anyhow!("behavior in {} violates the task", path.display())));
                }
                println!("behavior: ok");
            }
        }
    }
    Ok(())
}

fn configure_jobs(jobs: Option<usize>) -> CliResult<Execution> {
    match jobs {
        Some(0) => Err(fail(code::PARSE, anyhow!("--jobs must be at least 1"))),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::default()),
    }
}

fn load_scenario(path: &Path) -> CliResult<Scenario> {
    Scenario::load(path).map_err(|e| fail(code::PARSE, anyhow!("{}: {e}", path.display())))
}

fn read_formula(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path).with_context(|| format!("reading {path}"))?.trim().to_string()),
        None => Ok(arg.to_string()),
    }
}

impl FormulaArgs {
    /// Parses the formulas. With a scenario, atoms are checked against its
    /// atom universe.
    fn task(&self, s: Option<&Scenario>) -> CliResult<Task> {
        let parse = |text: &str| -> CliResult<Formula> {
            let text = read_formula(text)?;
            let parsed = match s {
                Some(s) => parse_ltl(&text, &s.atom_universe()),
                None => tempofleet::ltl::parse_formula(&text),
            };
            parsed.map_err(|e| fail(code::PARSE, anyhow!("formula {text:?}: {e}")))
        };
        let indexed = |arg: &str, count: Option<usize>, what: &str| -> CliResult<(usize, Formula)> {
            let (id, text) = arg
                .split_once('=')
                .ok_or_else(|| fail(code::PARSE, anyhow!("expected {what} formula as ID=FORMULA, got {arg:?}")))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| fail(code::PARSE, anyhow!("{what} id {id:?} is not a positive integer")))?;
            if id == 0 || count.is_some_and(|n| id > n) {
                return Err(fail(code::PARSE, anyhow!("no {what} with id {id}")));
            }
            Ok((id - 1, parse(text)?))
        };
        let globals = self.formula.iter().map(|f| parse(f)).collect::<CliResult<Vec<_>>>()?;
        let task = Task {
            global: (!globals.is_empty()).then(|| Formula::conjunction(globals)),
            robots: self
                .robot_formula
                .iter()
                .map(|a| indexed(a, s.map(Scenario::num_robots), "robot"))
                .collect::<CliResult<_>>()?,
            objects: self
                .object_formula
                .iter()
                .map(|a| indexed(a, s.map(Scenario::num_objects), "object"))
                .collect::<CliResult<_>>()?,
        };
        if task.global.is_none() && task.robots.is_empty() && task.objects.is_empty() {
            return Err(fail(code::PARSE, anyhow!("no formula given")));
        }
        Ok(task)
    }
}

fn make_plan(s: &Scenario, task: &Task, args: &PlannerArgs, exec: Execution) -> CliResult<PrefixSuffixPlan> {
    let nba = translate(&task.conjunction());
    log::info!("automaton: {} states, {} transitions", nba.num_states(), nba.num_edges());
    let budget = |e: PlanError| match e {
        PlanError::Budget(_) => fail(code::BUDGET, e.into()),
        PlanError::InvalidInitial => fail(code::PARSE, e.into()),
    };
    let t = Instant::now();
    let plan = match args.mode {
        Mode::Exact => exact_plan(s, &nba, ExactOptions { exec, ..Default::default() })
            .map_err(budget)?
            .ok_or_else(|| fail(code::INFEASIBLE, anyhow!("task is infeasible")))?,
        Mode::Sampling => {
            let params = PlannerParams {
                n_max: args.n_max,
                seed: args.seed,
                bias: args.bias,
                exec,
                ..Default::default()
            };
            params.validate().map_err(|e| fail(code::PARSE, e.into()))?;
            plan_sampling(s, &nba, &params)
                .map_err(budget)?
                .ok_or_else(|| fail(code::BUDGET, anyhow!("no plan found within {} iterations", args.n_max)))?
        }
    };
    log::info!("planned in {:.3} s", t.elapsed().as_secs_f64());
    if !verify_plan(&plan, &nba, s) {
        return Err(anyhow!("internal error: the planner returned a plan that fails verification").into());
    }
    Ok(plan)
}

fn load_plan(path: &Path, s: &Scenario, task: &Task) -> CliResult<PrefixSuffixPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let plan: PrefixSuffixPlan = serde_json::from_str(&text).map_err(|e| fail(code::PARSE, anyhow!("{}: {e}", path.display())))?;
    if !verify_plan(&plan, &translate(&task.conjunction()), s) {
        return Err(fail(
            code::VERIFICATION,
            anyhow!("{} is not a valid plan for this scenario and task", path.display()),
        ));
    }
    Ok(plan)
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
