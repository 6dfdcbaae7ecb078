use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aeromanip::config::{parse_config, ScenarioConfig, ScenarioKind};
use aeromanip::scenario::{run_scenario, statics_table, workspace_cloud, write_summary};
use aeromanip::trace::{write_statics, write_trace, write_workspace};

#[derive(Parser)]
#[command(
    name = "aeromanip",
    version,
    about = "Planar contact-inspection simulator for an aerial manipulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file
    Simulate {
        /// Scenario config (TOML)
        config: PathBuf,
        /// Output directory for trace, summary and effective config
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario kind from the config
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Equilibrium thrust sweep over a contact-force range
    StaticsSweep {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Dump the manipulator workspace point cloud
    Workspace {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(config: &Path, kind_override: Option<ScenarioKind>) -> Result<ScenarioConfig, String> {
    let mut cfg = parse_config(config).map_err(|e| e.to_string())?;
    if let Some(kind) = kind_override {
        cfg.kind = kind;
    }
    cfg.resolve();
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn prepare_out(out: &Path) -> Result<(), String> {
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))
}

fn run_simulation(cfg: &ScenarioConfig, out: &Path) -> Result<ExitCode, String> {
    let run = run_scenario(cfg).map_err(|e| e.to_string())?;

    let trace_path = out.join("trace.csv");
    write_trace(&run.trace, &trace_path).map_err(|e| e.to_string())?;
    let summary_path = out.join("summary.txt");
    write_summary(&run.summary, &summary_path).map_err(|e| e.to_string())?;
    let config_path = out.join("effective_config.toml");
    std::fs::write(&config_path, cfg.to_toml_string())
        .map_err(|e| format!("cannot write {}: {e}", config_path.display()))?;

    println!("wrote {}", trace_path.display());
    println!("wrote {}", summary_path.display());
    println!("wrote {}", config_path.display());
    print!("{}", aeromanip::scenario::summary_to_string(&run.summary));

    if let Some(abort) = &run.abort {
        eprintln!("model abort at t = {} s: {}", abort.t, abort.reason);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_statics(cfg: &ScenarioConfig, out: &Path) -> Result<ExitCode, String> {
    let table = statics_table(cfg).map_err(|e| e.to_string())?;
    let path = out.join("statics.csv");
    write_statics(&table, &path).map_err(|e| e.to_string())?;
    let feasible = table.iter().filter(|r| r.feasible).count();
    println!("wrote {} ({} points, {} feasible)", path.display(), table.len(), feasible);
    Ok(ExitCode::SUCCESS)
}

fn run_workspace(cfg: &ScenarioConfig, out: &Path) -> Result<ExitCode, String> {
    let cloud = workspace_cloud(cfg).map_err(|e| e.to_string())?;
    let path = out.join("workspace.csv");
    write_workspace(&cloud, &path).map_err(|e| e.to_string())?;
    let app = cloud.iter().filter(|p| p.application).count();
    println!(
        "wrote {} ({} points, {} in application space)",
        path.display(),
        cloud.len(),
        app
    );
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            scenario,
        } => {
            let kind = scenario
                .map(|s| s.parse::<ScenarioKind>())
                .transpose()?;
            let cfg = load(&config, kind)?;
            prepare_out(&out)?;
            match cfg.kind {
                ScenarioKind::StaticsSweep => run_statics(&cfg, &out),
                ScenarioKind::WorkspaceDump => run_workspace(&cfg, &out),
                _ => run_simulation(&cfg, &out),
            }
        }
        Command::StaticsSweep { config, out } => {
            let cfg = load(&config, Some(ScenarioKind::StaticsSweep))?;
            prepare_out(&out)?;
            run_statics(&cfg, &out)
        }
        Command::Workspace { config, out } => {
            let cfg = load(&config, Some(ScenarioKind::WorkspaceDump))?;
            prepare_out(&out)?;
            run_workspace(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
