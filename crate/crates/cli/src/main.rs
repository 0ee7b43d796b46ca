use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surfvortex::validate::format_table;
use surfvortex::{resolve_output_dir, run_scenario, validate_suite, CliError, Command, Level, ScenarioConfig};

/// Point vortices on surfaces conformal to the round sphere.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run whatever the scenario's experiment block declares.
    Run(Scenario),
    /// Integrate the configured vortices.
    Simulate(Scenario),
    /// Tight vortex pairs against the geodesic they should follow.
    DipoleTest(Scenario),
    /// Poincaré section of a family of vortex pairs.
    Poincare(Scenario),
    /// Tables of h, u, Robin function and curvature.
    GreensTable(Scenario),
    /// Run the invariant suite; exit 0 iff every check passes.
    Validate {
        /// Include the slow checks (Steiner identity, dipole convergence, …).
        #[arg(long)]
        full: bool,
        /// Shift the Robin constant by this amount (exercises the failure path).
        #[arg(long, hide = true, default_value_t = 0.0)]
        corrupt_robin: f64,
    },
}

#[derive(clap::Args)]
struct Scenario {
    config: PathBuf,
    /// Overrides the config's output_dir (and the output-root variable).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn scenario(args: &Scenario, command: Command) -> Result<(), (CliError, Option<PathBuf>)> {
    let cfg = ScenarioConfig::load(&args.config).map_err(|e| (e, None))?;
    let dir = resolve_output_dir(&cfg, args.output_dir.as_deref());
    let report = run_scenario(&cfg, command, dir.clone()).map_err(|e| (e, Some(dir)))?;
    println!(
        "{} finished in {:.2}s; wrote {} to {}",
        report.command,
        report.wall_time_s,
        report.files.join(", "),
        report.output_dir.display()
    );
    Ok(())
}

fn report_error(err: &CliError, dir: Option<&Path>) {
    let record = serde_json::to_string(&err.record()).unwrap_or_else(|_| err.to_string());
    eprintln!("{record}");
    if let Some(dir) = dir {
        // the run already created the directory; a failure here is not worth masking the original error
        let _ = std::fs::write(dir.join("error.json"), format!("{record}\n"));
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Run(s) => scenario(s, Command::Auto),
        Cmd::Simulate(s) => scenario(s, Command::Simulate),
        Cmd::DipoleTest(s) => scenario(s, Command::Dipole),
        Cmd::Poincare(s) => scenario(s, Command::Poincare),
        Cmd::GreensTable(s) => scenario(s, Command::GreensTable),
        Cmd::Validate { full, corrupt_robin } => {
            let level = if *full { Level::Full } else { Level::Quick };
            let outcomes = validate_suite(level, *corrupt_robin);
            print!("{}", format_table(&outcomes));
            let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.name.to_string()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err((CliError::Validation(failed), None))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((err, dir)) => {
            report_error(&err, dir.as_deref());
            ExitCode::from(err.exit_code())
        }
    }
}
