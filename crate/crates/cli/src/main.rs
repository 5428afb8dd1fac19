use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bellsim_cli::config::{builtin_config, CliError, ExperimentConfig, OptimizeConfig};
use bellsim_cli::pipeline::{
    run_avg, run_experiment, run_optimize, run_repro, run_tomo, write_outputs, Scenario,
};

/// Simulator for direct projective measurement in the Bell basis of a
/// dipolar-coupled spin pair.
#[derive(Parser)]
#[command(name = "bellsim", version, about)]
struct Cli {
    /// Verbose logging to stderr.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config and write its report and bar tables.
    Run {
        /// Path to a config file, or a built-in name (paper, ideal).
        #[arg(short, long)]
        config: String,
        /// Output directory; defaults to the config's `outputs` field.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Override the config's tomography seed.
        #[arg(short, long)]
        seed: Option<u64>,
    },
    /// Reproduce a built-in scenario (fig2, fig3) on the paper config.
    Repro {
        scenario: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Tune cycle delays against the double-quantum target.
    Optimize {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(short, long)]
        seed: Option<u64>,
    },
    /// Inspect the effective Hamiltonian of a config's cycle.
    Avg {
        #[arg(short, long)]
        config: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Tomography roundtrip demo on the config's initial state.
    Tomo {
        #[arg(short, long)]
        config: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Override the config's readout seed.
        #[arg(short, long)]
        seed: Option<u64>,
    },
}

fn load_experiment(name_or_path: &str) -> Result<ExperimentConfig, CliError> {
    let text = match builtin_config(name_or_path) {
        Some(text) => text.to_string(),
        None => fs::read_to_string(name_or_path).map_err(|e| {
            CliError::Config(format!("cannot read config '{name_or_path}': {e}"))
        })?,
    };
    ExperimentConfig::from_json(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.verbose {
        env_logger::Builder::from_default_env()
            .filter_level(log::LevelFilter::Debug)
            .init();
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("bellsim: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, out, seed } => {
            let mut cfg = load_experiment(&config)?;
            if let Some(seed) = seed {
                cfg.tomography.seed = seed;
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.outputs));
            let (report, before, after) = run_experiment(&cfg, None)?;
            write_outputs(&report, &before, &after, &out_dir)?;
            println!(
                "run: oracle deviation {:.3e} (bound {:.3e}, {}), report under {}",
                report.oracle_deviation,
                report.oracle_bound,
                if report.within_oracle_bound { "ok" } else { "EXCEEDED" },
                out_dir.display()
            );
            Ok(())
        }
        Command::Repro { scenario, out } => {
            let scenario = Scenario::parse(&scenario)?;
            let (report, before, after) = run_repro(scenario)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&report.config.outputs));
            write_outputs(&report, &before, &after, &out_dir)?;
            println!(
                "repro {}: fidelity(after, before) = {:.4}, oracle deviation {:.3e}, report under {}",
                report.scenario.as_deref().unwrap_or("?"),
                report.fidelity_after_vs_before,
                report.oracle_deviation,
                out_dir.display()
            );
            Ok(())
        }
        Command::Optimize { config, out, seed } => {
            let text = fs::read_to_string(&config).map_err(|e| {
                CliError::Config(format!("cannot read config '{}': {e}", config.display()))
            })?;
            let mut cfg = OptimizeConfig::from_json(&text)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.outputs));
            let (result, trace_csv) = run_optimize(&cfg)?;
            fs::create_dir_all(&out_dir)?;
            fs::write(
                out_dir.join("optimize_result.json"),
                serde_json::to_string_pretty(&result).expect("result serializes"),
            )?;
            fs::write(out_dir.join("optimize_trace.csv"), trace_csv)?;
            println!(
                "optimize: objective {:.6e} after {} evaluations, fidelities (Φ+={:.4}, Φ-={:.4}), gap {:.1} rad/s",
                result.objective_value,
                result.evaluations,
                result.fidelities.0,
                result.fidelities.1,
                result.lambda_gap_rad_s
            );
            Ok(())
        }
        Command::Avg { config, out } => {
            let cfg = load_experiment(&config)?;
            let summary = run_avg(&cfg)?;
            println!(
                "eigenvalues (rad/s): Φ+ {:+.3}, Φ- {:+.3}, Ψ+ {:+.3}, Ψ- {:+.3}",
                summary.eigenvalues_rad_s[0],
                summary.eigenvalues_rad_s[1],
                summary.eigenvalues_rad_s[2],
                summary.eigenvalues_rad_s[3]
            );
            println!(
                "bell overlaps: Φ+ {:.6}, Φ- {:.6}, Ψ+ {:.6}, Ψ- {:.6}; cycle time {:.3e} s",
                summary.bell_overlaps[0],
                summary.bell_overlaps[1],
                summary.bell_overlaps[2],
                summary.bell_overlaps[3],
                summary.cycle_time_s
            );
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(
                    dir.join("avg_report.json"),
                    serde_json::to_string_pretty(&summary).expect("summary serializes"),
                )?;
            }
            Ok(())
        }
        Command::Tomo { config, out, seed } => {
            let cfg = load_experiment(&config)?;
            let (fid, truth, estimate) = run_tomo(&cfg, seed)?;
            println!(
                "tomo: reconstruction fidelity {:.6} at noise σ = {}",
                fid, cfg.tomography.noise_sigma
            );
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                let bell = bellsim_core::hamiltonians::bell_transform();
                fs::write(
                    dir.join("tomo_true_mult.csv"),
                    bellsim_core::tomography::bar_export(&truth, None)
                        .map_err(CliError::numerical("tomography"))?
                        .to_csv(),
                )?;
                fs::write(
                    dir.join("tomo_recon_mult.csv"),
                    bellsim_core::tomography::bar_export(&estimate, None)
                        .map_err(CliError::numerical("tomography"))?
                        .to_csv(),
                )?;
                fs::write(
                    dir.join("tomo_recon_bell.csv"),
                    bellsim_core::tomography::bar_export(&estimate, Some(&bell))
                        .map_err(CliError::numerical("tomography"))?
                        .to_csv(),
                )?;
            }
            Ok(())
        }
    }
}
