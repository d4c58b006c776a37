//! Batch command-line front end for phase-cycling scheme design,
//! verification, pathway reports, echo simulation, and decay analysis.
//!
//! Every command writes its outputs plus a `manifest.json` echoing the
//! resolved configuration; feeding a manifest back via `--config`
//! reproduces the run byte for byte.
//!
//! Exit codes: 0 success, 2 validation error, 3 budget exceeded,
//! 4 fit non-convergence.

mod config;
mod output;
mod tasks;

use clap::{Parser, Subcommand};
use config::{
    parse_noise, read_config, CliError, FidelityConfig, SchemeRef, SequenceSpec,
    SimulateConfig, SimulateTask,
};
use std::path::PathBuf;
use tasks::{parse_scheme_kind, parse_sequence_kind, FitFilters};

#[derive(Parser)]
#[command(name = "echocycle", version, about = "Phase-cycling toolkit for inversion-pulse dynamical decoupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a TPC, CPC, or HPC scheme and write it as JSON.
    Scheme {
        /// tpc, cpc, or hpc
        #[arg(long)]
        kind: String,
        /// Number of inversion pulses.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "echocycle_out")]
        out: PathBuf,
    },
    /// Verify the echo-cancellation coverage of a scheme file.
    Verify {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value = "echocycle_out")]
        out: PathBuf,
    },
    /// Enumerate coherence-transfer pathways and their echoes as CSV.
    Pathways {
        /// cp, cpmg, or udd
        #[arg(long)]
        kind: String,
        #[arg(long)]
        m: usize,
        /// Inter-pulse spacing (CP/CPMG), seconds.
        #[arg(long)]
        tau: Option<f64>,
        /// Total sequence time (UDD), seconds.
        #[arg(long)]
        total_time: Option<f64>,
        /// Final coherence order (+1 or -1).
        #[arg(long, default_value_t = -1)]
        final_order: i8,
        /// Include non-refocusing (anti-echo) pathways.
        #[arg(long)]
        all: bool,
        /// Noise model as inline JSON or a path to a JSON file.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, default_value = "echocycle_out")]
        out: PathBuf,
    },
    /// Run a phase-cycled simulation task from a config file or flags.
    Simulate {
        /// JSON config (or a manifest from a previous run).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        total_time: Option<f64>,
        /// Scheme kind (tpc/cpc/hpc) or a path to a scheme JSON file.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        noise: Option<String>,
        #[arg(long)]
        ensemble: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "echocycle_out")]
        out: PathBuf,
    },
    /// Fit decay curves or scaling exponents from a CSV file.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// mono, stretched, ir, or scaling
        #[arg(long)]
        model: String,
        /// Restrict scaling fits to one phase-cycling label.
        #[arg(long)]
        cycling: Option<String>,
        /// Restrict scaling fits to one sequence label.
        #[arg(long)]
        sequence: Option<String>,
        #[arg(long)]
        m_min: Option<usize>,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long, default_value = "echocycle_out")]
        out: PathBuf,
    },
    /// Effective-state fidelity sweep over pulse counts.
    Fidelity {
        #[arg(long)]
        config: Option<PathBuf>,
        /// cp or udd
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated pulse counts, e.g. 2,4,8,16.
        #[arg(long)]
        m_list: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        noise: Option<String>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        total_time: Option<f64>,
        #[arg(long)]
        ensemble: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "echocycle_out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Scheme { kind, m, out } => tasks::cmd_scheme(parse_scheme_kind(&kind)?, m, &out),
        Command::Verify { scheme, out } => tasks::cmd_verify(&scheme, &out),
        Command::Pathways { kind, m, tau, total_time, final_order, all, noise, out } => {
            let noise = noise.as_deref().map(parse_noise).transpose()?.unwrap_or_default();
            tasks::cmd_pathways(
                parse_sequence_kind(&kind)?,
                m,
                tau,
                total_time,
                final_order,
                all,
                noise,
                &out,
            )
        }
        Command::Simulate {
            config,
            kind,
            m,
            tau,
            total_time,
            scheme,
            noise,
            ensemble,
            seed,
            out,
        } => {
            let cfg = match config {
                Some(path) => read_config::<SimulateConfig>(&path)?,
                None => {
                    let kind = kind
                        .ok_or_else(|| CliError::Validation("--kind required without --config".into()))?;
                    let m = m
                        .ok_or_else(|| CliError::Validation("--m required without --config".into()))?;
                    let scheme_arg = scheme.ok_or_else(|| {
                        CliError::Validation("--scheme required without --config".into())
                    })?;
                    let scheme_ref = match parse_scheme_kind(&scheme_arg) {
                        Ok(k) => SchemeRef { kind: Some(k), file: None },
                        Err(_) => SchemeRef { kind: None, file: Some(PathBuf::from(scheme_arg)) },
                    };
                    SimulateConfig {
                        task: SimulateTask::Trace,
                        sequence: SequenceSpec {
                            kind: parse_sequence_kind(&kind)?,
                            m,
                            tau,
                            total_time,
                        },
                        noise: noise.as_deref().map(parse_noise).transpose()?.unwrap_or_default(),
                        scheme: scheme_ref,
                        ensemble: ensemble.unwrap_or(1),
                        seed: seed.unwrap_or(0),
                        sweep_taus: None,
                        sweep_m: None,
                        compare_schemes: None,
                        storage_times: None,
                    }
                }
            };
            tasks::cmd_simulate(&cfg, &out)
        }
        Command::Fit { data, model, cycling, sequence, m_min, m_max, out } => {
            let filters = FitFilters { cycling, sequence, m_min, m_max };
            tasks::cmd_fit(&data, &model, &filters, &out)
        }
        Command::Fidelity {
            config,
            family,
            m_list,
            scheme,
            noise,
            tau,
            total_time,
            ensemble,
            seed,
            out,
        } => {
            let cfg = match config {
                Some(path) => read_config::<FidelityConfig>(&path)?,
                None => {
                    let family = family.ok_or_else(|| {
                        CliError::Validation("--family required without --config".into())
                    })?;
                    let m_list: Vec<usize> = m_list
                        .ok_or_else(|| {
                            CliError::Validation("--m-list required without --config".into())
                        })?
                        .split(',')
                        .map(|s| {
                            s.trim().parse().map_err(|e| {
                                CliError::Validation(format!("bad m value '{s}': {e}"))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    let scheme = scheme.ok_or_else(|| {
                        CliError::Validation("--scheme required without --config".into())
                    })?;
                    FidelityConfig {
                        family: parse_sequence_kind(&family)?,
                        m_list,
                        scheme: parse_scheme_kind(&scheme)?,
                        noise: noise.as_deref().map(parse_noise).transpose()?.unwrap_or_default(),
                        tau,
                        total_time,
                        ensemble: ensemble.unwrap_or(1),
                        seed: seed.unwrap_or(0),
                    }
                }
            };
            tasks::cmd_fidelity(&cfg, &out)
        }
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code())
        }
    }
}
