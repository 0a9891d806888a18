use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nanonav::harness::{run, HarnessError, ScenarioConfig, ScenarioKind};

#[derive(Parser)]
#[command(name = "nanonav", version, about = "Run simulated indoor nano-drone scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hold a fixed setpoint under external camera feedback.
    PositionHold(RunArgs),
    /// Hold a setpoint using only onboard estimates until the drone leaves the frame.
    InternalOnlyDrift(RunArgs),
    /// Fly a list of waypoints.
    WaypointNav(RunArgs),
    /// Relay experiment on the pitch axis followed by a step test with the derived gains.
    ZnAutotune(RunArgs),
    /// Iterative gain search over closed-loop trials.
    IterativeAutotune(RunArgs),
    /// Track and land on a platform moving around a circle.
    Landing(RunArgs),
    /// Plan through a sequence of hoops with RRT* and fly the plan.
    Hoops(RunArgs),
    /// One drone flies the circular formation.
    Circle(RunArgs),
    /// Three drones rotate on a circle with a fixed angular separation.
    Rotation(RunArgs),
    /// Two drones walk a square while a third holds the center.
    Square(RunArgs),
    /// Print the default config of a scenario as TOML.
    Preset { scenario: ScenarioKind },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; fields not given keep the scenario's defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Directory for log.csv, metrics.json and config.toml.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(kind: ScenarioKind, args: RunArgs) -> Result<bool, HarnessError> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::preset(kind),
    };
    if cfg.scenario != kind {
        return Err(HarnessError::config(
            "scenario",
            format!("config is for `{}`, not `{}`", cfg.scenario, kind),
        ));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(duration) = args.duration {
        cfg.duration = duration;
    }
    let dir = args.out.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            if let (Some(dir), Some(log)) = (&dir, e.partial_log()) {
                std::fs::create_dir_all(dir)?;
                log.save(&dir.join("log.csv"))?;
                eprintln!("wrote partial log to {}", dir.display());
            }
            return Err(e);
        }
    };
    println!("{}", outcome.metrics.to_json());
    if let Some(dir) = dir {
        outcome.write(&dir)?;
        eprintln!("wrote {}", dir.display());
    }
    Ok(outcome.success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::PositionHold(a) => (ScenarioKind::PositionHold, a),
        Command::InternalOnlyDrift(a) => (ScenarioKind::InternalOnlyDrift, a),
        Command::WaypointNav(a) => (ScenarioKind::WaypointNav, a),
        Command::ZnAutotune(a) => (ScenarioKind::ZnAutotune, a),
        Command::IterativeAutotune(a) => (ScenarioKind::IterativeAutotune, a),
        Command::Landing(a) => (ScenarioKind::MovingPlatformLanding, a),
        Command::Hoops(a) => (ScenarioKind::HoopTraversal, a),
        Command::Circle(a) => (ScenarioKind::FormationCircle, a),
        Command::Rotation(a) => (ScenarioKind::FormationRotation, a),
        Command::Square(a) => (ScenarioKind::FormationSquare, a),
        Command::Preset { scenario } => {
            print!("{}", ScenarioConfig::preset(scenario).to_toml());
            return ExitCode::SUCCESS;
        }
    };
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{kind}: success criteria not met");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{kind}: {e}");
            ExitCode::from(2)
        }
    }
}
