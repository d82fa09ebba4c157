// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `optimize`, `sweep` and `export`.
//!
//! Exit status is 0 on success, 2 for configuration errors, 3 when a run
//! stopped on the monotonicity guard and 4 for I/O failures.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::PenaltyMode;
use crate::error::{Error, Result};
use crate::experiments::{
    load_history, run_experiment, write_exports, ExperimentReport, ExperimentSpec, OutputKind,
    Sweep, SweepParameter,
};
use crate::optimizer::{SeedField, TargetSpec, TimeUpdate};

#[derive(Debug, Parser)]
#[command(
    name = "mcontrol",
    version,
    about = "Time-optimal monotonic control of spin-chain gates"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one optimization.
    Optimize(RunArgs),
    /// Run one optimization per value of `--param`.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        param: Option<SweepParameter>,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Re-export CSV tables from a saved JSON history.
    Export {
        history: PathBuf,
        /// Defaults to the directory holding the history.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "history,fields,trajectory"
        )]
        outputs: Vec<OutputKind>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GateName {
    Cnnot,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    spins: Option<usize>,
    #[arg(long, value_enum)]
    gate: Option<GateName>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long = "a")]
    a: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    stop_tol: Option<f64>,
    #[arg(long)]
    time_update: Option<TimeUpdate>,
    #[arg(long)]
    penalty_mode: Option<PenaltyMode>,
    /// `zero` or `constant:<amplitude>`.
    #[arg(long)]
    seed_field: Option<SeedField>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<OutputKind>>,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_file(path)?,
            None => {
                let mut spec = ExperimentSpec::new("run", Default::default());
                spec.outputs = vec![
                    OutputKind::History,
                    OutputKind::Fields,
                    OutputKind::Trajectory,
                ];
                spec
            }
        };
        let c = &mut spec.config;
        if let Some(v) = self.spins {
            c.spins = v;
        }
        if let Some(GateName::Cnnot) = self.gate {
            c.target = TargetSpec::Cnnot;
        }
        if let Some(v) = self.alpha0 {
            c.alpha0 = v;
        }
        if let Some(v) = self.t0 {
            c.t0 = v;
        }
        if let Some(v) = self.a {
            c.a = v;
        }
        if let Some(v) = self.r0 {
            c.r0 = v;
        }
        if let Some(v) = self.grid {
            c.grid = v;
        }
        if let Some(v) = self.iters {
            c.max_iter = v;
        }
        if let Some(v) = self.stop_tol {
            c.stop_tol = v;
        }
        if let Some(v) = self.time_update {
            c.time_update = v;
        }
        if let Some(v) = self.penalty_mode {
            c.penalty_mode = v;
        }
        if let Some(v) = self.seed_field {
            c.seed_field = v;
        }
        if let Some(name) = &self.name {
            spec.name = name.clone();
        }
        if let Some(dir) = &self.out {
            spec.output_dir = dir.clone();
        }
        if let Some(outputs) = &self.outputs {
            spec.outputs = outputs.clone();
        }
        Ok(spec)
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Optimize(args) => {
            let mut spec = args.spec()?;
            spec.sweep = None;
            report(&run_experiment(&spec, args.jobs)?)
        }
        Command::Sweep { run, param, values } => {
            let mut spec = run.spec()?;
            match (param, values.is_empty()) {
                (Some(parameter), false) => spec.sweep = Some(Sweep { parameter, values }),
                (None, true) if spec.sweep.is_some() => {}
                (Some(_), true) | (None, false) => {
                    return Err(Error::InvalidConfig(
                        "--param and --values must be given together".into(),
                    ))
                }
                (None, true) => {
                    return Err(Error::InvalidConfig(
                        "sweep needs --param/--values or a [sweep] table in --config".into(),
                    ))
                }
            }
            report(&run_experiment(&spec, run.jobs)?)
        }
        Command::Export {
            history,
            out,
            outputs,
        } => {
            let doc = load_history(&history)?;
            let dir = out
                .or_else(|| history.parent().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let stem = history
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "history".into());
            for path in write_exports(&doc, &dir, &stem, &outputs)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn report(report: &ExperimentReport) -> Result<i32> {
    for run in &report.runs {
        let h = &run.history;
        let label = run.value.map_or_else(String::new, |v| format!("{v}: "));
        println!(
            "{label}T_f = {:.6}  P = {:.6}  J = {:.9}  iterations = {}  termination = {}",
            h.final_duration,
            h.final_fidelity,
            h.final_cost(),
            h.records.len(),
            h.termination.as_str()
        );
        if let Some(err) = &h.guard_error {
            eprintln!("guard failure: {err}");
        }
    }
    for path in report.files() {
        println!("wrote {}", path.display());
    }
    Ok(if report.guard_failed() { 3 } else { 0 })
}
