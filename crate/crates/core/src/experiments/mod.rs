// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment descriptions, parameter sweeps and result files.
//!
//! An [`ExperimentSpec`] names a base [`OptimizationConfig`], an optional
//! sweep over `T0` or `alpha0`, and the artifacts to write. Every run produces
//! a JSON history; CSV exports are added on request. File names and contents
//! depend only on the experiment description, so re-running an experiment
//! reproduces its outputs byte for byte regardless of how many workers ran it.

pub mod cli;
mod export;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{run, OptimizationConfig, RunHistory, Termination};

pub use export::{
    export_fields_csv, export_history_csv, export_probability_csv, format_significant,
    load_history, sweep_summary_csv, write_history_json, FieldsDocument, FinalDocument,
    HistoryDocument,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "T0", alias = "t0")]
    T0,
    #[serde(rename = "alpha0")]
    Alpha0,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::T0 => "T0",
            SweepParameter::Alpha0 => "alpha0",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &OptimizationConfig, value: f64) -> OptimizationConfig {
        let mut config = base.clone();
        match self {
            SweepParameter::T0 => config.t0 = value,
            SweepParameter::Alpha0 => config.alpha0 = value,
        }
        config
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "T0" | "t0" => Ok(Self::T0),
            "alpha0" => Ok(Self::Alpha0),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected T0 or alpha0)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Artifact written next to each run's JSON history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    /// `<stem>_history.csv`: `k,J,T,P,fluence`.
    History,
    /// `<stem>_fields.csv`: `s,t,E_1x,…`.
    Fields,
    /// `<stem>_probability.csv`: `s,P(s)`.
    Trajectory,
}

impl FromStr for OutputKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "history" => Ok(Self::History),
            "fields" => Ok(Self::Fields),
            "trajectory" => Ok(Self::Trajectory),
            other => Err(format!(
                "unknown output `{other}` (expected history, fields or trajectory)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub config: OptimizationConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentSpec {
    pub fn new(name: impl Into<String>, config: OptimizationConfig) -> Self {
        Self {
            name: name.into(),
            config,
            sweep: None,
            outputs: Vec::new(),
            output_dir: default_output_dir(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::InvalidConfig(format!(
                "experiment name `{}` must be nonempty and contain no path separators",
                self.name
            )));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::InvalidConfig(
                    "sweep needs at least one value".into(),
                ));
            }
            if let Some(v) = sweep.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidConfig(format!(
                    "sweep values must be positive, got {v}"
                )));
            }
            if sweep.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidConfig(
                    "sweep values must be strictly increasing".into(),
                ));
            }
        }
        for config in self.configs() {
            config.validate()?;
        }
        Ok(())
    }

    /// One `(sweep value, config)` pair per run; a single `(None, config)` without a sweep.
    pub fn runs(&self) -> Vec<(Option<f64>, OptimizationConfig)> {
        match &self.sweep {
            None => vec![(None, self.config.clone())],
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&v| (Some(v), sweep.parameter.apply(&self.config, v)))
                .collect(),
        }
    }

    fn configs(&self) -> impl Iterator<Item = OptimizationConfig> + '_ {
        self.runs().into_iter().map(|(_, c)| c)
    }

    /// File stem of a run: `<name>` or `<name>_<param>=<value>`.
    pub fn run_stem(&self, value: Option<f64>) -> String {
        match (&self.sweep, value) {
            (Some(sweep), Some(v)) => format!("{}_{}={}", self.name, sweep.parameter, v),
            _ => self.name.clone(),
        }
    }
}

/// One finished run of an experiment.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub value: Option<f64>,
    pub history: RunHistory,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutput>,
    /// `<name>_summary.csv` for sweeps.
    pub summary: Option<PathBuf>,
}

impl ExperimentReport {
    pub fn guard_failed(&self) -> bool {
        self.runs
            .iter()
            .any(|r| r.history.termination == Termination::GuardFailure)
    }

    pub fn files(&self) -> impl Iterator<Item = &PathBuf> {
        self.runs
            .iter()
            .flat_map(|r| r.files.iter())
            .chain(self.summary.iter())
    }
}

/// Runs every point of `spec` on at most `jobs` workers and writes its files.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<ExperimentReport> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.output_dir).map_err(|e| Error::io(&spec.output_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {jobs} workers: {e}")))?;
    let runs = spec.runs();
    let outputs: Vec<Result<RunOutput>> = pool.install(|| {
        runs.par_iter()
            .map(|(value, config)| {
                let history = run(config)?;
                let files = write_run(spec, *value, &history)?;
                Ok(RunOutput {
                    value: *value,
                    history,
                    files,
                })
            })
            .collect()
    });
    let runs = outputs.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = match &spec.sweep {
        Some(sweep) => {
            let rows: Vec<(f64, &RunHistory)> = runs
                .iter()
                .map(|r| (r.value.expect("sweep runs carry a value"), &r.history))
                .collect();
            let path = spec.output_dir.join(format!("{}_summary.csv", spec.name));
            write_file(&path, &sweep_summary_csv(sweep.parameter, &rows)?)?;
            Some(path)
        }
        None => None,
    };
    Ok(ExperimentReport { runs, summary })
}

fn write_run(
    spec: &ExperimentSpec,
    value: Option<f64>,
    history: &RunHistory,
) -> Result<Vec<PathBuf>> {
    let stem = spec.run_stem(value);
    let json = spec.output_dir.join(format!("{stem}.json"));
    write_history_json(&json, history)?;
    let mut files = vec![json];
    let doc = HistoryDocument::from_history(history)?;
    files.extend(write_exports(&doc, &spec.output_dir, &stem, &spec.outputs)?);
    Ok(files)
}

/// Writes the requested CSV exports of a history under `dir`.
pub fn write_exports(
    doc: &HistoryDocument,
    dir: &Path,
    stem: &str,
    outputs: &[OutputKind],
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for kind in outputs {
        let (suffix, body) = match kind {
            // An aborted zero-iteration run has nothing to tabulate.
            OutputKind::History if doc.records.is_empty() => continue,
            OutputKind::History => ("history", export_history_csv(&doc.records)?),
            OutputKind::Fields => (
                "fields",
                export_fields_csv(
                    &doc.final_state.controls()?,
                    &doc.final_state.fields.channels,
                )?,
            ),
            OutputKind::Trajectory => {
                let model = doc.config.build_model()?;
                let objective = doc.config.build_objective()?;
                let fields = doc.final_state.controls()?;
                (
                    "probability",
                    export_probability_csv(&model, &fields, &objective)?,
                )
            }
        };
        let path = dir.join(format!("{stem}_{suffix}.csv"));
        write_file(&path, &body)?;
        files.push(path);
    }
    Ok(files)
}

pub(crate) fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}
