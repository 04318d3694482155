//! `tlrrt`: plan, verify, translate, benchmark, plot and generate scenarios.
//!
//! Exit codes: 0 success, 1 other failure, 2 bad configuration or input,
//! 3 no plan found, 4 automaton has no feasible accepting state,
//! 5 plan failed verification.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{translate, RunConfig};
use tlrrt::bench::{plan_with, run_benchmark, Mode};
use tlrrt::buchi::to_hoa;
use tlrrt::formula::parse_prop;
use tlrrt::geometry::{EnvironmentFile, Workspace};
use tlrrt::product::{verify_plan, PlanFile};
use tlrrt::rrt::{PlanError, RadiusMode};
use tlrrt::scenario::{case1, case2, scatter, Scenario};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NO_PLAN: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_INVALID: u8 = 5;

#[derive(Parser)]
#[command(name = "tlrrt", version, about = "Sampling-based multi-robot planning for LTL tasks without next")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan for a configuration and write the plan JSON.
    Plan {
        #[command(flatten)]
        run: RunArgs,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Translate a formula to a HOA automaton on stdout.
    Translate {
        formula: String,
        /// Drop clauses that are infeasible in this environment.
        #[arg(long)]
        prune: bool,
        /// Environment JSON, required by `--prune`.
        #[arg(long)]
        environment: Option<PathBuf>,
        /// Conjunctions that may not be required together (repeatable).
        #[arg(long = "subformula")]
        subformulas: Vec<String>,
    },
    /// Check a plan file against a configuration.
    Validate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run seeded trials and report per-trial rows and aggregates.
    Benchmark {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Per-trial CSV; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Per-trial runtimes CSV.
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Render an environment and optionally a plan as SVG.
    Plot {
        #[arg(long)]
        environment: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write a fixture scenario: environment.json, formula.ltl and config.json.
    Gen {
        #[arg(value_enum)]
        kind: ScenarioKind,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Triangle side length.
        #[arg(long, default_value_t = 0.15)]
        side: f64,
        /// Robots (scatter).
        #[arg(long, default_value_t = 4)]
        robots: usize,
        /// Atoms per subformula (scatter).
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Generator seed (scatter).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    Case1,
    Case2,
    Scatter,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    radius: Option<RadiusArg>,
    #[arg(long)]
    n_pre: Option<usize>,
    #[arg(long)]
    n_suf: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Return the first complete plan.
    #[arg(long)]
    stop_at_first: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Unbiased,
    Biased,
}

#[derive(Clone, Copy, ValueEnum)]
enum RadiusArg {
    Practical,
    Optimal,
    Zero,
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait Code<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Code<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, err: e.into() })
    }
}

fn fail<T>(code: u8, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        code,
        err: anyhow::Error::msg(msg.into()),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())).code(EXIT_OTHER),
        None => std::io::stdout().write_all(text.as_bytes()).context("cannot write stdout").code(EXIT_OTHER),
    }
}

fn plan_error(e: PlanError) -> Failure {
    let code = match e {
        PlanError::InfeasibleAutomaton | PlanError::NoInitial => EXIT_INFEASIBLE,
        PlanError::InvalidStart | PlanError::TeamSize { .. } => EXIT_CONFIG,
        PlanError::SamplerStuck(_) => EXIT_OTHER,
    };
    Failure { code, err: e.into() }
}

fn load_run(run: &RunArgs) -> Result<config::Loaded, Failure> {
    let mut cfg = RunConfig::from_path(&run.config).code(EXIT_CONFIG)?;
    if let Some(m) = run.mode {
        cfg.mode = match m {
            ModeArg::Unbiased => Mode::Unbiased,
            ModeArg::Biased => Mode::Biased,
        };
    }
    if let Some(r) = run.radius {
        cfg.rrt.radius = match r {
            RadiusArg::Practical => RadiusMode::Practical,
            RadiusArg::Optimal => RadiusMode::Optimal,
            RadiusArg::Zero => RadiusMode::Zero,
        };
    }
    if let Some(n) = run.n_pre {
        cfg.rrt.n_max_pre = n;
    }
    if let Some(n) = run.n_suf {
        cfg.rrt.n_max_suf = n;
    }
    if let Some(e) = run.eta {
        cfg.rrt.eta = e;
    }
    cfg.rrt.stop_at_first |= run.stop_at_first;
    let loaded = cfg.load().code(EXIT_CONFIG)?;
    let table = loaded.pruned.distance_table();
    if loaded.pruned.initial().iter().all(|&q| loaded.pruned.feasible_accepting(&table, q).is_empty()) {
        return fail(EXIT_INFEASIBLE, "automaton has no reachable accepting cycle in this environment");
    }
    Ok(loaded)
}

fn cmd_plan(run: RunArgs, out: Option<PathBuf>) -> Result<(), Failure> {
    let l = load_run(&run)?;
    let c = &l.config;
    let report = plan_with(c.mode, &l.ws, &l.pruned, &c.start, &c.rrt, &c.bias, run.seed, None).map_err(plan_error)?;
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    let Some(plan) = report.plan else {
        return fail(
            EXIT_NO_PLAN,
            format!(
                "no plan found ({} prefix iterations, {} accepting prefix nodes, {} suffix iterations)",
                report.prefix_iterations, report.prefix_goals, report.suffix_iterations
            ),
        );
    };
    if let Err(d) = verify_plan(&plan, &l.nba, &l.ws) {
        return fail(EXIT_INVALID, format!("planner output failed verification: {d}"));
    }
    let file = PlanFile {
        seed: run.seed,
        params: serde_json::json!({ "mode": c.mode, "rrt": c.rrt, "bias": c.bias }),
        plan: Some(plan),
    };
    emit(out.as_deref(), &file.to_json())
}

fn cmd_translate(formula: &str, prune: bool, environment: Option<PathBuf>, subformulas: &[String]) -> Result<(), Failure> {
    let ws = match &environment {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .with_context(|| format!("cannot read {}", p.display()))
                .and_then(|t| Ok(Workspace::from_json(&t)?))
                .code(EXIT_CONFIG)?,
        ),
        None => None,
    };
    if prune && ws.is_none() {
        return fail(EXIT_CONFIG, "--prune needs --environment");
    }
    let bounds = ws.as_ref().map_or((u32::MAX, u32::MAX), |w| (w.n_robots() as u32, w.n_regions() as u32));
    let mut nba = translate(formula, bounds).code(EXIT_CONFIG)?;
    if prune {
        let w = ws.as_ref().expect("checked above");
        nba = nba.prune(|a, b| w.regions_disjoint(a, b));
        let xis = subformulas.iter().map(|s| parse_prop(s)).collect::<Result<Vec<_>, _>>().code(EXIT_CONFIG)?;
        if !xis.is_empty() {
            nba = nba.prune_multi_subformula(&xis);
        }
    }
    emit(None, &to_hoa(&nba, Some(formula)))
}

fn cmd_validate(plan: &Path, config: &Path) -> Result<(), Failure> {
    let l = RunConfig::from_path(config).and_then(RunConfig::load).code(EXIT_CONFIG)?;
    let text = std::fs::read_to_string(plan).with_context(|| format!("cannot read {}", plan.display())).code(EXIT_CONFIG)?;
    let file = PlanFile::from_json(&text).with_context(|| format!("invalid plan file {}", plan.display())).code(EXIT_CONFIG)?;
    let Some(p) = file.plan else {
        return fail(EXIT_NO_PLAN, "plan file holds no plan");
    };
    match verify_plan(&p, &l.nba, &l.ws) {
        Ok(()) => emit(None, &format!("ok cost={}\n", p.cost)),
        Err(d) => fail(EXIT_INVALID, format!("{}: {d}", d.kind())),
    }
}

fn cmd_benchmark(run: RunArgs, trials: usize, csv: Option<PathBuf>, timing: Option<PathBuf>) -> Result<(), Failure> {
    let l = load_run(&run)?;
    let c = &l.config;
    let report = run_benchmark(c.mode, &l.ws, &l.pruned, &c.start, &c.rrt, &c.bias, run.seed, trials).map_err(plan_error)?;
    emit(csv.as_deref(), &report.to_csv())?;
    if let Some(t) = timing {
        emit(Some(&t), &report.timing_csv())?;
    }
    eprint!("{}", report.summary());
    Ok(())
}

fn cmd_plot(environment: &Path, plan: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), Failure> {
    let ws = std::fs::read_to_string(environment)
        .with_context(|| format!("cannot read {}", environment.display()))
        .and_then(|t| Ok(Workspace::from_json(&t)?))
        .code(EXIT_CONFIG)?;
    let plan = match plan {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display())).code(EXIT_CONFIG)?;
            PlanFile::from_json(&text).with_context(|| format!("invalid plan file {}", p.display())).code(EXIT_CONFIG)?.plan
        }
        None => None,
    };
    if plan.as_ref().is_some_and(|p| p.n_robots() != ws.n_robots()) {
        return fail(EXIT_CONFIG, "plan and environment disagree on the number of robots");
    }
    emit(out.as_deref(), &tlrrt::svg::render(&ws, plan.as_ref()))
}

fn write_scenario(sc: &Scenario, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let env: &EnvironmentFile = &sc.environment;
    std::fs::write(dir.join("environment.json"), serde_json::to_string_pretty(env)? + "\n")?;
    std::fs::write(dir.join("formula.ltl"), format!("{}\n", sc.formula))?;
    let cfg = RunConfig {
        environment: "environment.json".into(),
        formula_file: Some("formula.ltl".into()),
        start: sc.start.clone(),
        subformulas: sc.subformulas.clone(),
        ..RunConfig::default()
    };
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    Ok(())
}

fn cmd_gen(kind: ScenarioKind, dir: &Path, side: f64, robots: usize, m: usize, seed: u64) -> Result<(), Failure> {
    if !(side > 0.0 && side <= 0.25) {
        return fail(EXIT_CONFIG, "side must lie in (0, 0.25]");
    }
    let sc = match kind {
        ScenarioKind::Case1 => case1(side),
        ScenarioKind::Case2 => case2(side),
        ScenarioKind::Scatter => {
            if !(m >= 1 && m <= robots && 8 * m >= robots) {
                return fail(EXIT_CONFIG, "scatter needs 1 <= m <= robots <= 8 m");
            }
            scatter(robots, m, seed, side)
        }
    };
    write_scenario(&sc, dir).code(EXIT_OTHER)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Plan { run, out } => cmd_plan(run, out),
        Cmd::Translate {
            formula,
            prune,
            environment,
            subformulas,
        } => cmd_translate(&formula, prune, environment, &subformulas),
        Cmd::Validate { plan, config } => cmd_validate(&plan, &config),
        Cmd::Benchmark { run, trials, csv, timing } => cmd_benchmark(run, trials, csv, timing),
        Cmd::Plot { environment, plan, out } => cmd_plot(&environment, plan, out),
        Cmd::Gen {
            kind,
            out_dir,
            side,
            robots,
            m,
            seed,
        } => cmd_gen(kind, &out_dir, side, robots, m, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
