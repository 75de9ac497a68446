//! `cqed-toffoli`: run, sweep and check the cavity-QED Toffoli simulation.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a scientific
//! check failed.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use cqed_core::analysis::{
    default_epsilon_grid, default_tau_grid, dispersive_validation, ensemble_vs_lindblad, gate_fidelity, sweep,
    DISPERSIVE_RATIOS, SMOKE_TAUS,
};
use cqed_core::protocol::{
    compare_with_toffoli, encode_logical, logical_process_matrix, run_ideal, toffoli_schedule_with, LogicalBits,
};
use cqed_core::qmath::state_fidelity;

use config::{parse_grid, parse_number, parse_tau, ConfigArgs, RunConfig, Spacing};

const TRUTH_TABLE_TOL: f64 = 1e-9;
const MIN_OVERLAP_AT_4: f64 = 0.90;
const MIN_OVERLAP_AT_50: f64 = 0.999;

#[derive(Parser, Debug)]
#[command(name = "cqed-toffoli", version, about = "Cavity-QED Toffoli gate simulator")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the lossless protocol on the 8 logical inputs
    TruthTable {
        /// Print the gate schedule as JSON instead
        #[arg(long)]
        dump_schedule: bool,
        /// Decode with the encoding rotation instead of its inverse (debugging)
        #[arg(long)]
        no_adjoint_decode: bool,
    },
    /// Estimate the gate fidelity at the configured noise point
    Run,
    /// Estimate the fidelity over a (tau, epsilon) grid and write CSV
    Sweep {
        /// Lifetimes in s: "a,b,c" or log-spaced "start:stop:count"
        #[arg(long)]
        tau_grid: Option<String>,
        /// Imprecisions: "a,b,c" or linear "start:stop:count"
        #[arg(long)]
        eps_grid: Option<String>,
        /// CSV destination; standard output when absent
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the grid as JSON
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Check the dispersive approximation and the trajectory solver
    Validate {
        /// 1000 trajectories and a 0.05 trace-distance threshold
        #[arg(long)]
        quick: bool,
    },
}

enum Failure {
    Config(anyhow::Error),
    Science(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<cqed_core::Error> for Failure {
    fn from(e: cqed_core::Error) -> Self {
        Failure::Science(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = cli
        .config
        .resolve()
        .map_err(Failure::Config)
        .and_then(|cfg| execute(&cli.command, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Science(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match command {
        Command::TruthTable {
            dump_schedule,
            no_adjoint_decode,
        } => truth_table(cfg, *dump_schedule, *no_adjoint_decode, &mut out),
        Command::Run => {
            let schedule = toffoli_schedule_with(&cfg.physical()?, &cfg.schedule_options())
                .context("building schedule")?;
            let result = gate_fidelity(&schedule, &cfg.noise()?)?;
            writeln!(out, "{}", result.to_json()).context("writing output")?;
            Ok(())
        }
        Command::Sweep {
            tau_grid,
            eps_grid,
            out: path,
            json_out,
        } => {
            let taus = match tau_grid {
                Some(spec) => parse_grid(spec, Spacing::Log, parse_tau)?,
                None => default_tau_grid(),
            };
            let eps = match eps_grid {
                Some(spec) => parse_grid(spec, Spacing::Linear, parse_number)?,
                None => default_epsilon_grid(),
            };
            // reject bad cells before spending time on the good ones
            for &tau in &taus {
                for &e in &eps {
                    cqed_core::NoiseParams::new(tau, e, cfg.n_traj, cfg.seed).context("sweep grid")?;
                }
            }
            let schedule = toffoli_schedule_with(&cfg.physical()?, &cfg.schedule_options())
                .context("building schedule")?;
            let grid = sweep(&schedule, &taus, &eps, cfg.n_traj, cfg.seed)?;
            let csv = grid.to_csv();
            match path {
                Some(p) => {
                    std::fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?;
                    writeln!(out, "wrote {} rows to {}", taus.len() * eps.len(), p.display())
                        .context("writing output")?;
                }
                None => out.write_all(csv.as_bytes()).context("writing output")?,
            }
            if let Some(p) = json_out {
                std::fs::write(p, grid.to_json() + "\n").with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(())
        }
        Command::Validate { quick } => validate(cfg, *quick, &mut out),
    }
}

fn truth_table(cfg: &RunConfig, dump: bool, no_adjoint: bool, out: &mut impl Write) -> Result<(), Failure> {
    let mut options = cfg.schedule_options();
    options.decode_adjoint = !no_adjoint;
    let schedule = toffoli_schedule_with(&cfg.physical()?, &options).context("building schedule")?;
    if dump {
        writeln!(out, "{}", schedule.to_json()).context("writing output")?;
        return Ok(());
    }
    let mut worst: f64 = 1.0;
    for b in LogicalBits::all() {
        let output = run_ideal(&schedule, &encode_logical(b, &schedule.space)?)?;
        let f = state_fidelity(&output, &encode_logical(b.toffoli(), &schedule.space)?)?;
        worst = worst.min(f);
        writeln!(out, "{b} -> {}  fidelity {f:.9}", b.toffoli()).context("writing output")?;
    }
    let m = logical_process_matrix(&schedule)?;
    writeln!(out, "process matrix moduli (row = output, column = input):").context("writing output")?;
    for r in 0..8 {
        let row: Vec<String> = (0..8).map(|c| format!("{:.9}", m[(r, c)].norm())).collect();
        writeln!(out, "  {}", row.join(" ")).context("writing output")?;
    }
    let cmp = compare_with_toffoli(&m);
    writeln!(out, "modulus error {:?}", cmp.modulus_error).context("writing output")?;
    writeln!(out, "phase spread {:?} rad", cmp.phase_spread).context("writing output")?;

    let reference = m[(LogicalBits::from_index(0).toffoli().index(), 0)];
    let mut defects = Vec::new();
    for b in LogicalBits::all() {
        let phase = (m[(b.toffoli().index(), b.index())] / reference).arg();
        if phase.abs() > TRUTH_TABLE_TOL {
            writeln!(out, "phase defect on {b}: {phase:?} rad relative to (0,0,0)").context("writing output")?;
            defects.push(b.to_string());
        }
    }
    if worst < 1.0 - TRUTH_TABLE_TOL || cmp.modulus_error > TRUTH_TABLE_TOL || cmp.phase_spread > TRUTH_TABLE_TOL {
        return Err(Failure::Science(format!(
            "not a Toffoli gate: worst fidelity {worst:?}, phase defects on [{}]",
            defects.join(" ")
        )));
    }
    Ok(())
}

fn validate(cfg: &RunConfig, quick: bool, out: &mut impl Write) -> Result<(), Failure> {
    let (n_traj, threshold) = if quick { (1_000, 0.05) } else { (10_000, 0.02) };
    let params = cfg.physical()?;
    let mut failures = Vec::new();

    writeln!(out, "dispersive approximation (minimum overlap over collision inputs)").context("writing output")?;
    writeln!(out, "delta/omega,min_overlap").context("writing output")?;
    let report = dispersive_validation(&params, &DISPERSIVE_RATIOS)?;
    for r in &report {
        writeln!(out, "{:?},{:?}", r.delta_over_omega, r.min_overlap).context("writing output")?;
    }
    for r in &report {
        if r.delta_over_omega == 4.0 && r.min_overlap < MIN_OVERLAP_AT_4 {
            failures.push(format!("overlap {:?} < {MIN_OVERLAP_AT_4} at delta/omega = 4", r.min_overlap));
        }
        if r.delta_over_omega == 50.0 && r.min_overlap < MIN_OVERLAP_AT_50 {
            failures.push(format!("overlap {:?} < {MIN_OVERLAP_AT_50} at delta/omega = 50", r.min_overlap));
        }
    }
    if report.windows(2).any(|w| w[1].min_overlap < w[0].min_overlap) {
        failures.push("overlap is not monotone in delta/omega".into());
    }

    writeln!(out, "trajectories vs master equation ({n_traj} trajectories, epsilon = 0)").context("writing output")?;
    writeln!(out, "tau_s,max_trace_distance").context("writing output")?;
    let schedule = toffoli_schedule_with(&params, &cfg.schedule_options()).context("building schedule")?;
    for (i, &tau) in SMOKE_TAUS.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for b in LogicalBits::all() {
            let psi = encode_logical(b, &schedule.space)?;
            let seed = cqed_core::trajectories::derive_seed(cfg.seed, (i * 8 + b.index()) as u64);
            worst = worst.max(ensemble_vs_lindblad(&schedule, &psi, tau, n_traj, seed)?);
        }
        writeln!(out, "{tau:?},{worst:?}").context("writing output")?;
        if worst > threshold {
            failures.push(format!("trace distance {worst:?} > {threshold} at tau = {tau:?}"));
        }
    }

    if failures.is_empty() {
        writeln!(out, "all checks passed").context("writing output")?;
        Ok(())
    } else {
        Err(Failure::Science(failures.join("; ")))
    }
}
