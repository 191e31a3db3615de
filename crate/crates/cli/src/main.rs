use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use tamp_core::estimator::{score_plan, EstimatorParams, LlmOracle, RuleOracle, ScoringInput, SemanticOracle};
use tamp_core::ledger::CostLedger;
use tamp_core::llm::{ChatClient, LlmError};
use tamp_core::mission::{
    render_svg, run_mission, write_report_files, AlgorithmKind, BackendKind, MissionError, MissionInputs,
    MissionReport, ReportFormats, RunConfig,
};
use tamp_core::planner::{check_feasibility, LlmBackend, Mission, PlanError, PlannerBackend, ScriptedBackend};
use tamp_core::scenario::synthetic_scenario;
use tamp_core::scene::{HighLevelState, SceneGraph, TaskPlan};
use tamp_core::world::WorldConfig;

#[derive(Parser)]
#[command(name = "tamp", version, about = "Interleaved task and motion planning testbed")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one mission and write its report.
    Run(RunArgs),
    /// Check a plan against a scene graph; exit 0 iff it is feasible.
    Check {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Print the estimated cost breakdown of a plan.
    Estimate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        sigma: f64,
        #[arg(long, default_value = "scripted")]
        backend: BackendKind,
    },
    /// Run every (scenario, algorithm, seed) cell and write an aggregate CSV.
    Bench(BenchArgs),
    /// Plot cumulative m_overall of several reports into one SVG.
    Plot {
        #[arg(long)]
        out: PathBuf,
        reports: Vec<PathBuf>,
    },
    /// Write a synthetic scenario (scene.json, world.json, mission.json).
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    world: PathBuf,
    #[arg(long)]
    mission: PathBuf,
    #[arg(long, default_value = "inter")]
    algo: AlgorithmKind,
    #[arg(long, default_value = "scripted")]
    backend: BackendKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    sigma: f64,
    #[arg(long)]
    ledger_in: Option<PathBuf>,
    #[arg(long)]
    ledger_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of scenario directories, or `synthetic` for generated
    /// scenarios (one per seed).
    #[arg(long, default_value = "synthetic")]
    suite: String,
    #[arg(long, default_value = "inter,openloop,reactive", value_delimiter = ',')]
    algos: Vec<AlgorithmKind>,
    /// Inclusive range `a..b` or a comma list.
    #[arg(long, default_value = "1..10")]
    seeds: String,
    #[arg(long)]
    out: PathBuf,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self {
            code: 2,
            error: e.into(),
        }
    }
}

fn transport(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 4,
        error: e.into(),
    }
}

fn mission_failure(e: MissionError) -> Failure {
    match e {
        MissionError::Backend(PlanError::Transport(_)) => transport(e),
        other => other.into(),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_scene(path: &Path) -> anyhow::Result<SceneGraph> {
    SceneGraph::from_json(&read(path)?).with_context(|| format!("scene {}", path.display()))
}

fn load_inputs(scene: &Path, world: &Path, mission: &Path, ledger: Option<&Path>) -> anyhow::Result<MissionInputs> {
    let graph = load_scene(scene)?;
    let world = WorldConfig::from_json(&read(world)?, &graph).with_context(|| format!("world {}", world.display()))?;
    let mission = Mission::from_json(&read(mission)?).with_context(|| format!("mission {}", mission.display()))?;
    let ledger = match ledger {
        Some(p) => CostLedger::from_json(&read(p)?).with_context(|| format!("ledger {}", p.display()))?,
        None => CostLedger::new(),
    };
    Ok(MissionInputs {
        graph,
        world,
        mission,
        ledger,
    })
}

type Backends = (Box<dyn PlannerBackend>, Box<dyn SemanticOracle>);

fn backends(kind: BackendKind, sigma: f64) -> Result<Backends, Failure> {
    Ok(match kind {
        BackendKind::Scripted => (Box::new(ScriptedBackend), Box::new(RuleOracle::new(sigma))),
        BackendKind::Llm => {
            let client = ChatClient::from_env(sigma).map_err(|e: LlmError| Failure::from(e))?;
            (
                Box::new(LlmBackend::new(client.clone())),
                Box::new(LlmOracle::new(client)),
            )
        }
    })
}

fn exhausted(report: &MissionReport) -> bool {
    report.commands.iter().any(|c| c.planning_error.is_some())
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let inputs = load_inputs(&a.scene, &a.world, &a.mission, a.ledger_in.as_deref())?;
    let config = RunConfig {
        sigma: a.sigma,
        backend: a.backend,
        ..RunConfig::with_algorithm(a.algo, a.seed)
    };
    let (backend, oracle) = backends(a.backend, a.sigma)?;
    let outcome = run_mission(&inputs, &config, backend.as_ref(), oracle.as_ref()).map_err(mission_failure)?;
    let report = &outcome.report;
    write_report_files(
        report,
        &ReportFormats {
            json: Some(a.out.clone()),
            csv: a.csv,
            plot: a.plot,
        },
    )?;
    if let Some(p) = &a.ledger_out {
        write(p, &outcome.ledger.to_json())?;
    }
    println!(
        "{}: m_overall {:.3}, J_total {:.3}, fulfilled {}/{}",
        report.algorithm,
        report.m_overall,
        report.j_total,
        report.fulfilled(),
        report.rows.len()
    );
    if exhausted(report) {
        for c in report.commands.iter().filter(|c| c.planning_error.is_some()) {
            eprintln!(
                "command {}: {}",
                c.index,
                c.planning_error.as_deref().unwrap_or_default()
            );
        }
        return Err(Failure {
            code: 3,
            error: anyhow::anyhow!("planning failed for at least one command"),
        });
    }
    Ok(())
}

fn load_plan(path: &Path) -> anyhow::Result<TaskPlan> {
    TaskPlan::from_json(&read(path)?).with_context(|| format!("plan {}", path.display()))
}

fn cmd_check(scene: &Path, plan: &Path) -> Result<bool, Failure> {
    let graph = load_scene(scene)?;
    let plan = load_plan(plan)?;
    let violations = check_feasibility(&plan.actions, &HighLevelState::default(), &graph);
    if violations.is_empty() {
        println!("ok: {} actions feasible", plan.len());
    }
    for v in &violations {
        println!("{v}");
    }
    Ok(violations.is_empty())
}

fn cmd_estimate(
    scene: &Path,
    world: &Path,
    ledger: Option<&Path>,
    plan: &Path,
    sigma: f64,
    backend: BackendKind,
) -> Result<(), Failure> {
    let graph = load_scene(scene)?;
    let world = WorldConfig::from_json(&read(world)?, &graph)?;
    let ledger = match ledger {
        Some(p) => CostLedger::from_json(&read(p)?)?,
        None => CostLedger::new(),
    };
    let plan = load_plan(plan)?;
    let (_, oracle) = backends(backend, sigma)?;
    let params = EstimatorParams {
        robot_speed: world.robot_speed,
        ..EstimatorParams::default()
    };
    let input = ScoringInput {
        graph: &graph,
        grid: &world.grid,
        ledger: &ledger,
        oracle: oracle.as_ref(),
        params: &params,
    };
    let estimate = score_plan(0, &plan.actions, &HighLevelState::default(), world.start_cell, &input)
        .map_err(anyhow::Error::from)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&estimate).map_err(anyhow::Error::from)?
    );
    Ok(())
}

fn parse_seeds(text: &str) -> anyhow::Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim_start_matches('=').trim().parse()?);
        if a > b {
            bail!("empty seed range {text}");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().with_context(|| format!("bad seed {s:?}")))
        .collect()
}

/// Scenario name and its inputs for `seed`.
enum Suite {
    Synthetic,
    Dir(Vec<(String, MissionInputs)>),
}

fn load_suite(spec: &str) -> anyhow::Result<Suite> {
    if spec == "synthetic" {
        return Ok(Suite::Synthetic);
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(spec)
        .with_context(|| format!("reading suite {spec}"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("scene.json").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        bail!("no scenario directories (with scene.json) under {spec}");
    }
    let mut out = Vec::new();
    for d in dirs {
        let ledger = d.join("ledger.json");
        let inputs = load_inputs(
            &d.join("scene.json"),
            &d.join("world.json"),
            &d.join("mission.json"),
            ledger.is_file().then_some(ledger.as_path()),
        )?;
        let name = d
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push((name, inputs));
    }
    Ok(Suite::Dir(out))
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let seeds = parse_seeds(&a.seeds)?;
    let suite = load_suite(&a.suite)?;
    let mut cells: Vec<(String, MissionInputs, AlgorithmKind, u64)> = Vec::new();
    for &seed in &seeds {
        let scenarios = match &suite {
            Suite::Synthetic => {
                let s = synthetic_scenario(seed);
                vec![(format!("synthetic_{seed}"), s.inputs().map_err(anyhow::Error::from)?)]
            }
            Suite::Dir(list) => list.clone(),
        };
        for (name, inputs) in scenarios {
            for &algo in &a.algos {
                cells.push((name.clone(), inputs.clone(), algo, seed));
            }
        }
    }
    let results: Vec<Result<MissionReport, MissionError>> = cells
        .par_iter()
        .map(|(_, inputs, algo, seed)| {
            let config = RunConfig::with_algorithm(*algo, *seed);
            run_mission(inputs, &config, &ScriptedBackend, &RuleOracle::new(config.sigma)).map(|o| o.report)
        })
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "algorithm",
        "seed",
        "m_overall",
        "j_total",
        "fulfilled",
        "objects",
    ])
    .map_err(anyhow::Error::from)?;
    let mut per_algo: Vec<(AlgorithmKind, Vec<f64>)> = a.algos.iter().map(|k| (*k, Vec::new())).collect();
    for ((name, _, algo, seed), result) in cells.iter().zip(results) {
        let report = result.map_err(mission_failure)?;
        write(
            &a.out.join(name).join(format!("{algo}_seed{seed}.json")),
            &report.to_json(),
        )?;
        w.write_record([
            name.clone(),
            algo.to_string(),
            seed.to_string(),
            format!("{:.3}", report.m_overall),
            format!("{:.3}", report.j_total),
            report.fulfilled().to_string(),
            report.rows.len().to_string(),
        ])
        .map_err(anyhow::Error::from)?;
        if let Some((_, v)) = per_algo.iter_mut().find(|(k, _)| k == algo) {
            v.push(report.m_overall);
        }
    }
    let csv_text =
        String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?).map_err(anyhow::Error::from)?;
    write(&a.out.join("aggregate.csv"), &csv_text)?;
    for (algo, v) in &per_algo {
        let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
        println!("{algo}: mean m_overall {mean:.3} over {} runs", v.len());
    }
    Ok(())
}

fn cmd_plot(out: &Path, reports: &[PathBuf]) -> Result<(), Failure> {
    if reports.is_empty() {
        return Err(anyhow::anyhow!("no reports given").into());
    }
    let mut series = Vec::new();
    for p in reports {
        let r = MissionReport::from_json(&read(p)?).with_context(|| format!("report {}", p.display()))?;
        series.push((r.algorithm.to_string(), r.rows.iter().map(|r| r.m_overall).collect()));
    }
    write(out, &render_svg(&series))?;
    Ok(())
}

fn cmd_generate(seed: u64, out: &Path) -> Result<(), Failure> {
    let s = synthetic_scenario(seed);
    write(&out.join("scene.json"), &s.scene.to_canonical_json())?;
    write(
        &out.join("world.json"),
        &(serde_json::to_string(&s.world).map_err(anyhow::Error::from)? + "\n"),
    )?;
    write(
        &out.join("mission.json"),
        &(serde_json::to_string_pretty(&s.mission).map_err(anyhow::Error::from)? + "\n"),
    )?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Check { scene, plan } => match cmd_check(&scene, &plan) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Cmd::Estimate {
            scene,
            world,
            ledger,
            plan,
            sigma,
            backend,
        } => cmd_estimate(&scene, &world, ledger.as_deref(), &plan, sigma, backend),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Plot { out, reports } => cmd_plot(&out, &reports),
        Cmd::Generate { seed, out } => cmd_generate(seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
