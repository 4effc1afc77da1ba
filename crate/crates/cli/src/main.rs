//! `qcps` command line tool: partition, elect, run, and compare subcommands
//! over a single self-contained scenario file.
//!
//! Exit codes: 0 success, 2 input error, 3 semantic error, 4 internal
//! invariant violation.

use clap::{Parser, Subcommand, ValueEnum};
use qcps_core::cloud::TypeDatabase;
use qcps_core::election::{centroid, elect_coordinator};
use qcps_core::model::{NodeId, Position, SensorType};
use qcps_core::scenario::{parse_scenario, to_file_text, ScenarioError};
use qcps_core::sim::{self, ActionError, Model, Scenario, SimError};
use qcps_core::{compute_grids, Threshold};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INPUT: u8 = 2;
const EXIT_SEMANTIC: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "qcps", about = "Grid-partitioned sensor network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Scenario file (TOML)
    file: PathBuf,
    /// Print the parsed scenario back out and exit
    #[arg(long)]
    echo: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Qcps,
    Baseline,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the grid partition and list each grid
    Partition {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Override the scenario's threshold distance (meters)
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Compute per-grid centroids and elected coordinators
    Elect {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Execute the scenario workload and print the message trace
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value = "qcps")]
        model: ModelArg,
        /// Also write the trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Dump cloud databases as CSV files into this directory
        #[arg(long)]
        db_dump: Option<PathBuf>,
    },
    /// Run both models on the same workload and compare energy costs
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Append N seeded cross-grid queries to the workload
        #[arg(long, default_value_t = 0)]
        random_queries: usize,
        /// Write the per-node comparison CSV to this file instead of stdout
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn semantic(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_SEMANTIC,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let message = e.to_string();
        match &e {
            SimError::InvalidScenario(_) => Failure::input(message),
            SimError::Partition(_) => Failure::semantic(message),
            SimError::Workload { source, .. } => match source {
                ActionError::Protocol(_) | ActionError::Cloud(_) => Failure::semantic(message),
                ActionError::UnknownNode(_) | ActionError::UnknownGrid(_) => {
                    Failure::semantic(message)
                }
            },
            SimError::Election(_) | SimError::Registration(_) => Failure::internal(message),
        }
    }
}

fn load(args: &ScenarioArgs) -> Result<Option<Scenario>, Failure> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| Failure::input(format!("{}: {e}", args.file.display())))?;
    let scenario = parse_scenario(&text)?;
    if args.echo {
        print!("{}", to_file_text(&scenario));
        return Ok(None);
    }
    Ok(Some(scenario))
}

fn cmd_partition(scenario: &Scenario, threshold: Option<f64>) -> Result<(), Failure> {
    let threshold = match threshold {
        Some(t) if t.is_finite() && t > 0.0 => Threshold(t),
        Some(t) => return Err(Failure::input(format!("invalid threshold override {t}"))),
        None => scenario.threshold,
    };
    let (grids, _) = compute_grids(&scenario.nodes, threshold)
        .map_err(|e| Failure::semantic(e.to_string()))?;
    for grid in &grids {
        let members: Vec<&str> = grid.members.iter().map(|m| m.as_str()).collect();
        println!(
            "{} {} [{}] seed={}",
            grid.grid_id,
            grid.sensor_type,
            members.join(" "),
            grid.seed
        );
    }
    Ok(())
}

fn cmd_elect(scenario: &Scenario) -> Result<(), Failure> {
    let (grids, assigned) = compute_grids(&scenario.nodes, scenario.threshold)
        .map_err(|e| Failure::semantic(e.to_string()))?;
    let positions: BTreeMap<NodeId, Position> = assigned
        .iter()
        .map(|n| (n.node_id.clone(), n.position))
        .collect();
    for grid in &grids {
        let c = centroid(grid, &positions).map_err(|e| Failure::internal(e.to_string()))?;
        let coordinator =
            elect_coordinator(grid, &positions).map_err(|e| Failure::internal(e.to_string()))?;
        println!(
            "{} centroid=({:.3},{:.3},{:.3}) coordinator={}",
            grid.grid_id, c.point.x, c.point.y, c.point.z, coordinator
        );
    }
    Ok(())
}

fn dump_databases(
    dir: &Path,
    databases: &BTreeMap<SensorType, TypeDatabase>,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    for (ty, db) in databases {
        let mut csv = String::from("node_id,sim_time,value,unit\n");
        for row in &db.rows {
            let r = &row.reading;
            csv.push_str(&format!(
                "{},{:.3},{},{}\n",
                r.node_id, r.sim_time, r.value, r.unit
            ));
        }
        let path = dir.join(format!("{ty}.csv"));
        std::fs::write(&path, csv)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_run(
    mut scenario: Scenario,
    model: ModelArg,
    trace: Option<&Path>,
    db_dump: Option<&Path>,
) -> Result<(), Failure> {
    scenario.model = match model {
        ModelArg::Qcps => Model::Qcps,
        ModelArg::Baseline => Model::Baseline,
    };
    let result = sim::run(&scenario)?;
    let trace_text = result.trace_text();
    print!("{trace_text}");
    if let Some(path) = trace {
        std::fs::write(path, &trace_text)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    if let Some(dir) = db_dump {
        dump_databases(dir, &result.databases)?;
    }
    Ok(())
}

fn cmd_compare(
    mut scenario: Scenario,
    random_queries: usize,
    csv: Option<&Path>,
) -> Result<(), Failure> {
    sim::append_random_queries(&mut scenario, random_queries)?;
    let pair = sim::run_pair(&scenario)?;
    print!("{}", pair.comparison.render_table());
    let csv_text = pair.comparison.to_csv();
    match csv {
        Some(path) => std::fs::write(path, csv_text)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => print!("\n{csv_text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Partition {
            scenario,
            threshold,
        } => match load(&scenario)? {
            Some(s) => cmd_partition(&s, threshold),
            None => Ok(()),
        },
        Command::Elect { scenario } => match load(&scenario)? {
            Some(s) => cmd_elect(&s),
            None => Ok(()),
        },
        Command::Run {
            scenario,
            model,
            trace,
            db_dump,
        } => match load(&scenario)? {
            Some(s) => cmd_run(s, model, trace.as_deref(), db_dump.as_deref()),
            None => Ok(()),
        },
        Command::Compare {
            scenario,
            random_queries,
            csv,
        } => match load(&scenario)? {
            Some(s) => cmd_compare(s, random_queries, csv.as_deref()),
            None => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
