use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use superrad::config::load_config;
use superrad::experiments::{builtin, endfire_series, frequency_grid_khz, sweep_delta_omega, BUILTIN};
use superrad::lattice::ModeIndex;
use superrad::observables::{depletion_profile, final_record, render_pattern, Normalization, RenderOptions};
use superrad::output::{depletion_csv, endfire_csv, pgm_bytes, populations_csv, spectrum_csv, OutputDir};
use superrad::{simulate, Result, SimulationConfig};

#[derive(Parser)]
#[command(name = "superrad", version, about = "Two-frequency superradiant scattering simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the pump frequency difference and write a spectrum table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        from_khz: f64,
        #[arg(long, default_value_t = 60.0)]
        to_khz: f64,
        #[arg(long, default_value_t = 2.5)]
        step_khz: f64,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Normalize by the scattered total instead of the configured atom number.
        #[arg(long)]
        by_scattered: bool,
    },
    /// Run a built-in scenario.
    Scenario {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the built-in scenarios.
    ListScenarios,
}

fn write_run(dir: &mut OutputDir, cfg: &SimulationConfig) -> Result<Vec<String>> {
    let traj = simulate(cfg)?;
    dir.write("populations.csv", populations_csv(&traj).as_bytes())?;
    let record = final_record(&traj);
    let image = render_pattern(&record, &RenderOptions::default())?;
    dir.write("pattern.pgm", &pgm_bytes(&image))?;
    let condensate = ModeIndex::new(0, 0);
    let xi: Vec<f64> = (0..traj.grid.num_points).map(|j| traj.grid.xi(j)).collect();
    let before = depletion_profile(&traj.initial_state, condensate, None)?;
    let after = depletion_profile(&traj.final_state, condensate, None)?;
    dir.write("depletion.csv", depletion_csv(&xi, &before, &after).as_bytes())?;
    dir.write("endfire.csv", endfire_csv(&traj, &endfire_series(&traj)).as_bytes())?;
    Ok(traj.warnings)
}

/// Run `body` against a fresh output directory and always leave a manifest behind.
fn with_manifest(
    out: &Path,
    command: &str,
    sweep_khz: Option<Vec<f64>>,
    config: impl FnOnce() -> Result<SimulationConfig>,
    body: impl FnOnce(&mut OutputDir, &SimulationConfig) -> Result<Vec<String>>,
) -> Result<()> {
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    let (cfg, result) = match config() {
        Ok(c) => {
            let r = body(&mut dir, &c);
            (Some(c), r)
        }
        Err(e) => (None, Err(e)),
    };
    let (warnings, outcome) = match result {
        Ok(w) => (w, Ok(())),
        Err(e) => (Vec::new(), Err(e)),
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    dir.finish(command, cfg.as_ref(), outcome.as_ref().map(|_| ()), warnings, sweep_khz, start.elapsed())?;
    outcome
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ListScenarios => {
            for s in &BUILTIN {
                println!(
                    "{:<12} delta_omega = {:>4} kHz  g = {:.3e} 1/s  {}",
                    s.name, s.delta_omega_khz, s.coupling_g, s.description
                );
            }
            Ok(())
        }
        Command::Simulate { config, out } => with_manifest(&out, "simulate", None, || load_config(&config), write_run),
        Command::Scenario { name, out } => {
            let scenario = builtin(&name)?;
            with_manifest(&out, &format!("scenario {name}"), None, || Ok(scenario.config()), write_run)
        }
        Command::Sweep {
            config,
            from_khz,
            to_khz,
            step_khz,
            out,
            workers,
            by_scattered,
        } => {
            let grid = frequency_grid_khz(from_khz, to_khz, step_khz)?;
            with_manifest(&out, "sweep", Some(grid.clone()), || load_config(&config), |dir, cfg| {
                let scheme = if by_scattered {
                    Normalization::ByScattered
                } else {
                    Normalization::ByFixed(cfg.params.atom_number)
                };
                let table = sweep_delta_omega(cfg, &grid, scheme, workers)?;
                dir.write("spectrum.csv", spectrum_csv(&table).as_bytes())?;
                Ok(table
                    .rows
                    .iter()
                    .filter_map(|r| r.error.as_ref().map(|e| format!("{} kHz: {e}", r.delta_omega_khz)))
                    .collect())
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
