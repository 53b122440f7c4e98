//! Command-line front end.

use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, Parser, Subcommand};
use elastica_core::{
    energy, fd_gradient_check, make_scenario, resample_equal_arclength, residual_report, run_flow,
    self_intersections, EnergyParams, Error as CoreError, FlowConfig, Preset, Scenario, Trajectory,
};

use crate::config::FileConfig;
use crate::io::{self, Format};
use crate::svg;

#[derive(Debug, Parser)]
#[command(
    name = "elastica",
    version,
    about = "Minimizing-movement flow of open elastic curves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the flow for one or more scenarios.
    Run(RunArgs),
    /// Run the invariant suite on the built-in scenarios.
    Check(CheckArgs),
    /// Resample a polyline file to equal edges and print it.
    Resample(ResampleArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Comma-separated: segment, sinus, gamma, gamma_eps0.01, asym_gamma, file.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Step limit; may be combined with --stop-tol (first to trigger wins).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub diagnostics: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Run several scenarios on separate threads.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input polyline for the `file` scenario.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Steps per scenario.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input: exit 1.
    Usage(anyhow::Error),
    /// The flow broke an invariant or could not be continued: exit 2.
    Violation(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Violation(_) => 2,
        }
    }

    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Violation(e) => write!(f, "{e:#}"),
        }
    }
}

/// A fully resolved run of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub name: String,
    pub scenario: Scenario,
    pub epsilon: f64,
    pub tau: f64,
    pub steps: Option<usize>,
    pub stop_tol: Option<f64>,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub plans: Vec<RunPlan>,
    pub out: PathBuf,
    pub svg: bool,
    pub diagnostics: bool,
    pub format: Format,
    pub parallel: bool,
}

/// Merge presets, the config file and flags (in increasing precedence).
pub fn resolve(args: &RunArgs) -> anyhow::Result<RunSettings> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let names = args
        .scenario
        .clone()
        .or(file.scenario.clone())
        .ok_or_else(|| anyhow!("no scenario given (use --scenario)"))?;
    let steps = args.steps.or(file.steps);
    let stop_tol = args.stop_tol.or(file.stop_tol);
    let input = args.input.clone().or(file.input.clone());

    let mut plans = Vec::new();
    for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (scenario, preset) = if name == "file" {
            let path = input
                .as_ref()
                .ok_or_else(|| anyhow!("scenario `file` needs --in FILE"))?;
            let points = io::read_polyline(path)?;
            let n = args.n.or(file.n).unwrap_or(points.len().max(2));
            (Scenario::Polyline { points, n }, None)
        } else {
            let preset = Preset::by_name(name).ok_or_else(|| {
                let known: Vec<&str> = Preset::all().iter().map(|p| p.name).collect();
                anyhow!(
                    "unknown scenario `{name}` (known: {}, file)",
                    known.join(", ")
                )
            })?;
            let scenario = match args.n.or(file.n) {
                Some(n) => preset.scenario.clone().with_n(n),
                None => preset.scenario.clone(),
            };
            (scenario, Some(preset))
        };
        let epsilon = args
            .eps
            .or(file.eps)
            .or(preset.as_ref().map(|p| p.epsilon))
            .ok_or_else(|| anyhow!("--eps is required for `{name}`"))?;
        let tau = args
            .tau
            .or(file.tau)
            .or(preset.as_ref().map(|p| p.tau))
            .ok_or_else(|| anyhow!("--tau is required for `{name}`"))?;
        let stop_tol = match (steps, stop_tol) {
            (None, None) => Some(preset.as_ref().map_or(1e-6, |p| p.stop_tol)),
            (_, s) => s,
        };
        plans.push(RunPlan {
            name: name.to_string(),
            scenario,
            epsilon,
            tau,
            steps,
            stop_tol,
            snapshot_every: args.snapshot_every.or(file.snapshot_every).unwrap_or(1),
        });
    }
    if plans.is_empty() {
        return Err(anyhow!("no scenario given (use --scenario)"));
    }
    Ok(RunSettings {
        plans,
        out: args
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out")),
        svg: args.svg || file.svg.unwrap_or(false),
        diagnostics: args.diagnostics || file.diagnostics.unwrap_or(false),
        format: args.format.or(file.format).unwrap_or_default(),
        parallel: args.parallel || file.parallel.unwrap_or(false),
    })
}

fn classify(e: CoreError) -> Failure {
    match e {
        CoreError::BadParameters(_)
        | CoreError::TooFewPoints { .. }
        | CoreError::UnequalEdges { .. }
        | CoreError::DegenerateGap
        | CoreError::ZeroLengthInput
        | CoreError::ResampleFailed { .. }
        | CoreError::NonFinite => Failure::usage(e),
        _ => Failure::Violation(e.into()),
    }
}

fn flow_config(plan: &RunPlan) -> Result<FlowConfig, Failure> {
    let params = EnergyParams::new(plan.epsilon, plan.tau).map_err(classify)?;
    let mut cfg = FlowConfig::new(params).with_stop_tol(plan.stop_tol);
    cfg.n_steps = plan.steps;
    cfg.snapshot_every = plan.snapshot_every;
    Ok(cfg)
}

/// Run one plan and write its artifacts under `settings.out/<name>`.
pub fn execute(plan: &RunPlan, settings: &RunSettings) -> Result<Trajectory, Failure> {
    let initial = make_scenario(&plan.scenario).map_err(classify)?;
    let cfg = flow_config(plan)?;
    let traj = run_flow(&initial, &cfg)
        .map_err(|e| Failure::Violation(anyhow!(e).context(format!("scenario {}", plan.name))))?;
    let dir = settings.out.join(&plan.name);
    write_outputs(&traj, &dir, settings).map_err(Failure::usage)?;
    Ok(traj)
}

fn write_outputs(traj: &Trajectory, dir: &Path, settings: &RunSettings) -> anyhow::Result<()> {
    io::write_trajectory(traj, dir, settings.format)?;
    if settings.svg {
        let curves: Vec<_> = traj.snapshots.iter().map(|s| &s.curve).collect();
        let stride = curves.len().div_ceil(60).max(1);
        std::fs::write(dir.join("trajectory.svg"), svg::render(&curves, stride))?;
        let phases = svg::render_phases(&curves, stride.div_ceil(3));
        for (k, text) in phases.iter().enumerate() {
            std::fs::write(dir.join(format!("phase_{}.svg", k + 1)), text)?;
        }
    }
    if settings.diagnostics {
        write_diagnostics(traj, &dir.join("diagnostics.csv"))?;
    }
    Ok(())
}

/// Residuals for every step whose two curves were both recorded.
fn write_diagnostics(traj: &Trajectory, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| path.display().to_string())?;
    w.write_record([
        "step",
        "t",
        "interior_l2",
        "interior_max",
        "boundary_start",
        "boundary_end",
        "kappa_start",
        "kappa_end",
        "coupling_l2",
        "coupling_max",
        "self_intersections",
    ])?;
    let n_points = traj.final_curve().len();
    for n in 0..traj.n_steps() {
        if traj.snapshot(n).is_none() || traj.snapshot(n + 1).is_none() {
            continue;
        }
        let curve = traj.snapshot(n + 1).expect("checked above");
        let row = if n_points >= 5 {
            let r = residual_report(traj, n, &traj.params)?;
            vec![
                r.interior_l2,
                r.interior_max,
                r.boundary_start.norm(),
                r.boundary_end.norm(),
                r.kappa_boundary.0,
                r.kappa_boundary.1,
                r.coupling_l2,
                r.coupling_max,
            ]
        } else {
            vec![f64::NAN; 8]
        };
        let mut rec = vec![
            (n + 1).to_string(),
            format!("{:.16e}", (n + 1) as f64 * traj.tau()),
        ];
        rec.extend(row.iter().map(|v| format!("{v:.16e}")));
        rec.push(self_intersections(curve).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let settings = resolve(args).map_err(Failure::usage)?;
    let report = |plan: &RunPlan, traj: &Trajectory| {
        let c = traj.final_curve();
        println!(
            "{}: {} steps, t = {:.4}, E = {:.8}, length = {:.8}, gap = {:.8}, crossings = {}",
            plan.name,
            traj.n_steps(),
            traj.n_steps() as f64 * traj.tau(),
            traj.records.last().map_or(f64::NAN, |r| r.energy),
            c.total_length(),
            c.gap(),
            self_intersections(c)
        );
    };
    let results: Vec<Result<Trajectory, Failure>> = if settings.parallel {
        thread::scope(|s| {
            let handles: Vec<_> = settings
                .plans
                .iter()
                .map(|p| s.spawn(|| execute(p, &settings)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect()
        })
    } else {
        settings
            .plans
            .iter()
            .map(|p| execute(p, &settings))
            .collect()
    };
    let mut worst: Option<Failure> = None;
    for (plan, res) in settings.plans.iter().zip(results) {
        match res {
            Ok(traj) => report(plan, &traj),
            Err(e) => {
                eprintln!("error: {}: {e}", plan.name);
                if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                    worst = Some(e);
                }
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn cmd_check(args: &CheckArgs) -> Result<(), Failure> {
    let mut failed = 0;
    for preset in Preset::all() {
        let outcome = (|| -> anyhow::Result<String> {
            let initial = make_scenario(&preset.scenario)?;
            let params = EnergyParams::new(preset.epsilon, preset.tau)?;
            let rc = initial.to_reduced()?;
            let fd = fd_gradient_check(&rc, &initial, &params, 1e-4);
            if fd.is_nan() || fd >= 1e-6 {
                return Err(anyhow!("gradient check error {fd:e}"));
            }
            let cfg = FlowConfig::new(params)
                .with_steps(args.steps)
                .with_stop_tol(Some(preset.stop_tol));
            let traj = run_flow(&initial, &cfg)?;
            let e0 = energy(&initial, &params)?.total;
            let e1 = traj.records.last().map_or(e0, |r| r.energy);
            Ok(format!(
                "{} steps, E {e0:.6} -> {e1:.6}, gradient check {fd:.1e}",
                traj.n_steps()
            ))
        })();
        match outcome {
            Ok(msg) => println!("PASS {}: {msg}", preset.name),
            Err(e) => {
                failed += 1;
                println!("FAIL {}: {e:#}", preset.name);
            }
        }
    }
    if failed > 0 {
        Err(Failure::Violation(anyhow!("{failed} scenario(s) failed")))
    } else {
        Ok(())
    }
}

fn cmd_resample(args: &ResampleArgs) -> Result<(), Failure> {
    let points = io::read_polyline(&args.input).map_err(Failure::usage)?;
    let curve = resample_equal_arclength(&points, args.n).map_err(Failure::usage)?;
    let text = io::format_polyline(curve.points());
    match &args.out {
        Some(p) => std::fs::write(p, text)
            .with_context(|| p.display().to_string())
            .map_err(Failure::usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Check(a) => cmd_check(a),
        Command::Resample(a) => cmd_resample(a),
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let Failure::Usage(_) = e {
                eprintln!("{}", Cli::command().render_usage());
            }
            e.exit_code()
        }
    }
}
