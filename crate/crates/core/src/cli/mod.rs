//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when planning or simulation fails on a valid
//! scenario, 2 for usage, IO and scenario errors.

pub mod io;
pub mod presets;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;

use crate::planners::PlannerKind;
use crate::sim::{compute_metrics, plan_route, run_scenario, Outcome, Scenario, SimMode};
use io::{load_scenario, scenario_digest, scenario_to_toml};
use report::{write_route_csv, write_trajectory_csv, MetricsReport, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "suav", version, about = "Energy-aware planning and control for solar-powered UAVs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan a route and write its waypoints as CSV.
    Plan {
        /// Scenario TOML file or preset name.
        scenario: String,
        /// Planner to use; defaults to the scenario's own.
        #[arg(long)]
        planner: Option<PlannerKind>,
        /// Waypoint CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metrics TOML destination (stdout when absent).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Simulate a scenario with the chosen controller stack.
    Simulate {
        scenario: String,
        #[arg(long, default_value = "hybrid")]
        mode: SimMode,
        /// Trajectory CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run several planners on one scenario and tabulate them.
    Compare {
        scenario: String,
        /// Comma-separated planner names, at least two.
        #[arg(long, value_delimiter = ',', required = true)]
        planners: Vec<PlannerKind>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print a built-in scenario as TOML.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn resolve_scenario(arg: &str) -> Result<Scenario, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(sc) = presets::preset(arg) {
            return Ok(sc);
        }
    }
    load_scenario(path).map_err(usage)
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn emit(text: &str, dest: Option<&Path>) -> Result<(), Failure> {
    match dest {
        Some(p) => create(p)?
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_for(sc: &Scenario, runs: Vec<RunReport>) -> MetricsReport {
    MetricsReport {
        scenario: sc.name.clone(),
        digest: scenario_digest(sc),
        runs,
    }
}

fn cmd_plan(
    scenario: &str,
    planner: Option<PlannerKind>,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Result<(), Failure> {
    let sc = resolve_scenario(scenario)?;
    let kind = planner.unwrap_or(sc.planner);
    info!("planning '{}' with {kind}", sc.name);
    let route = plan_route(&sc, kind).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: e.to_string(),
    })?;
    if let Some(p) = out {
        write_route_csv(&route, &sc.environment, create(p)?).map_err(usage)?;
    }
    emit(&report_for(&sc, vec![RunReport::from_route(&route)]).to_toml(), report)
}

fn cmd_simulate(scenario: &str, mode: SimMode, out: Option<&Path>, report: Option<&Path>) -> Result<(), Failure> {
    let sc = resolve_scenario(scenario)?;
    info!("simulating '{}' in {} mode", sc.name, mode.name());
    let log = run_scenario(&sc, mode).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: e.to_string(),
    })?;
    if let Some(p) = out {
        write_trajectory_csv(&log, create(p)?).map_err(usage)?;
    }
    let metrics = compute_metrics(&log, &sc);
    emit(&report_for(&sc, vec![RunReport::from_metrics(mode.name(), &metrics)]).to_toml(), report)?;
    if metrics.outcome == Outcome::GoalReached {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FAILURE,
            message: format!("simulation ended with outcome {:?}", metrics.outcome),
        })
    }
}

fn cmd_compare(scenario: &str, planners: &[PlannerKind], report: Option<&Path>) -> Result<(), Failure> {
    if planners.len() < 2 {
        return Err(usage("compare needs at least two planners"));
    }
    let sc = resolve_scenario(scenario)?;
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = planners
            .iter()
            .map(|&k| {
                let sc = &sc;
                s.spawn(move || plan_route(sc, k))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("planner thread panicked")).collect()
    });
    let runs: Vec<RunReport> = planners
        .iter()
        .zip(&results)
        .map(|(k, r)| match r {
            Ok(route) => RunReport::from_route(route),
            Err(e) => RunReport::failed(k.name(), e),
        })
        .collect();
    emit(&report_for(&sc, runs).to_toml(), report)?;
    if results.iter().all(Result::is_err) {
        Err(Failure {
            code: EXIT_FAILURE,
            message: "every planner failed".into(),
        })
    } else {
        Ok(())
    }
}

fn cmd_preset(name: &str, out: Option<&Path>) -> Result<(), Failure> {
    let sc = presets::preset(name).ok_or_else(|| {
        usage(format!("unknown preset '{name}' (available: {})", presets::PRESET_NAMES.join(", ")))
    })?;
    emit(&scenario_to_toml(&sc), out)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Plan {
            scenario,
            planner,
            out,
            report,
        } => cmd_plan(scenario, *planner, out.as_deref(), report.as_deref()),
        Command::Simulate {
            scenario,
            mode,
            out,
            report,
        } => cmd_simulate(scenario, *mode, out.as_deref(), report.as_deref()),
        Command::Compare {
            scenario,
            planners,
            report,
        } => cmd_compare(scenario, planners, report.as_deref()),
        Command::Preset { name, out } => cmd_preset(name, out.as_deref()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
