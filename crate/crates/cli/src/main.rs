use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gass::config::RunConfig;
use gass::sweep::{run_sweep, to_csv, validate_rows, with_threads, SweepSpec, SweepVariable};
use gass::{overall_connectivity, simulate, Connectivity, Error, Quadrature, SimulationReport};

const THREADS_ENV: &str = "GASS_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "gass",
    version,
    about = "Two-hop ground/aerial/satellite connectivity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form success probabilities as JSON.
    Analytic(Common),
    /// Monte Carlo estimates with confidence intervals as JSON.
    Simulate(Common),
    /// Analytic and simulated results over a parameter grid.
    Sweep(Common),
    /// Fails with exit code 1 when analytic and simulated results disagree.
    Validate(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, requires = "sweep_values")]
    sweep_var: Option<String>,
    /// Comma-separated values, e.g. `0,100,200`.
    #[arg(long, requires = "sweep_var", allow_hyphen_values = true)]
    sweep_values: Option<String>,
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `sim.trials`.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Input(String),
    Numerical(String),
    Tolerance(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Tolerance(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) | Failure::Tolerance(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Geometry(_) | Error::Domain(_) => Failure::Input(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct AnalyticOutput<'a> {
    result: Connectivity,
    config: &'a str,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    #[serde(flatten)]
    report: SimulationReport,
    trials: u64,
    config: &'a str,
}

fn load(args: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials == 0 {
            return Err(Failure::Input("--trials must be at least 1".into()));
        }
        cfg.sim.trials = trials;
    }
    Ok(cfg)
}

fn sweep_spec(args: &Common, cfg: &RunConfig) -> Result<Option<SweepSpec>, Failure> {
    let (Some(name), Some(list)) = (&args.sweep_var, &args.sweep_values) else {
        return Ok(cfg.sweep_spec());
    };
    let variable = SweepVariable::parse(name).ok_or_else(|| {
        let known: Vec<&str> = SweepVariable::ALL.iter().map(|v| v.name()).collect();
        Failure::Input(format!(
            "unknown --sweep-var \"{name}\" (expected one of {})",
            known.join(", ")
        ))
    })?;
    let values = list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Input(format!("--sweep-values: cannot parse \"{}\"", s.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    SweepSpec::new(variable, values)
        .map(Some)
        .map_err(|e| Failure::Input(format!("--sweep-values: {e}")))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let quad = Quadrature::default();
    match command {
        Command::Analytic(args) => {
            let cfg = load(&args)?;
            let result = overall_connectivity(&cfg.scenario(), &quad)?;
            let text = match args.format.unwrap_or(Format::Json) {
                Format::Json => json(&AnalyticOutput {
                    result,
                    config: &cfg.to_toml_string(),
                }),
                Format::Csv => format!(
                    "p1_ana,p2_ana,pov_ana\n{:?},{:?},{:?}\n",
                    result.p1, result.p2, result.p_overall
                ),
            };
            emit(args.out.as_deref(), &text)
        }
        Command::Simulate(args) => {
            let cfg = load(&args)?;
            let plan = cfg.trial_plan();
            let report = simulate(&cfg.scenario(), &plan)?;
            let text = match args.format.unwrap_or(Format::Json) {
                Format::Json => json(&SimulateOutput {
                    report,
                    trials: plan.trials,
                    config: &cfg.to_toml_string(),
                }),
                Format::Csv => {
                    let (e1, e2) = (report.hop1.expect("both hops"), report.hop2.expect("both hops"));
                    let overall = report.overall.expect("both hops");
                    format!(
                        "p1_sim,p1_ci95_halfwidth,p2_sim,p2_ci95_halfwidth,pov_sim\n{:?},{:?},{:?},{:?},{:?}\n",
                        e1.mean,
                        e1.ci95_halfwidth(),
                        e2.mean,
                        e2.ci95_halfwidth(),
                        overall.p_overall
                    )
                }
            };
            emit(args.out.as_deref(), &text)
        }
        Command::Sweep(args) => {
            let cfg = load(&args)?;
            let spec = sweep_spec(&args, &cfg)?.ok_or_else(|| {
                Failure::Input("sweep needs --sweep-var/--sweep-values or a [sweep] section".into())
            })?;
            let rows = run_sweep(&cfg, &spec, &cfg.trial_plan(), &quad)?;
            let text = match args.format.unwrap_or(Format::Csv) {
                Format::Csv => to_csv(&rows),
                Format::Json => json(&rows),
            };
            emit(args.out.as_deref(), &text)
        }
        Command::Validate(args) => {
            if !(args.tol >= 0.0 && args.tol.is_finite()) {
                return Err(Failure::Input(format!(
                    "--tol must be a non-negative number (got {})",
                    args.tol
                )));
            }
            let cfg = load(&args)?;
            // without a grid, validate the configured point alone
            let spec = match sweep_spec(&args, &cfg)? {
                Some(spec) => spec,
                None => SweepSpec::new(
                    SweepVariable::HardcoreDistance,
                    vec![cfg.aerial.hardcore_distance_m],
                )?,
            };
            let rows = run_sweep(&cfg, &spec, &cfg.trial_plan(), &quad)?;
            let report = validate_rows(rows, args.tol);
            let text = match args.format.unwrap_or(Format::Json) {
                Format::Json => json(&report),
                Format::Csv => to_csv(&report.rows),
            };
            emit(args.out.as_deref(), &text)?;
            eprintln!(
                "max |analytic - simulated|: hop1 {:.4}, hop2 {:.4} (tolerance {})",
                report.max_abs_diff_hop1, report.max_abs_diff_hop2, report.tolerance
            );
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Tolerance("validation tolerance exceeded".into()))
            }
        }
    }
}

fn thread_count() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Input(format!(
                "{THREADS_ENV} must be a positive integer (got \"{v}\")"
            ))),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = thread_count().and_then(|threads| match threads {
        Some(n) => with_threads(n, || run(cli.command)),
        None => run(cli.command),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
