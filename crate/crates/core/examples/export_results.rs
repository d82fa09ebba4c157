// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Writes a JSON history plus history, field and probability CSVs, then
//! reloads the history and re-exports it.

use std::path::{Path, PathBuf};

use monotonic_control::experiments::{
    load_history, run_experiment, write_exports, ExperimentSpec, OutputKind,
};
use monotonic_control::{OptimizationConfig, Result, SeedField};

pub fn run_example(output_dir: &Path) -> Result<()> {
    let mut spec = ExperimentSpec::new(
        "export_demo",
        OptimizationConfig {
            grid: 200,
            max_iter: 50,
            seed_field: SeedField::Constant(0.05),
            ..Default::default()
        },
    );
    spec.outputs = vec![
        OutputKind::History,
        OutputKind::Fields,
        OutputKind::Trajectory,
    ];
    spec.output_dir = output_dir.to_path_buf();
    let report = run_experiment(&spec, 1)?;
    for path in report.files() {
        println!("wrote {}", path.display());
    }
    let doc = load_history(&output_dir.join("export_demo.json"))?;
    let again = output_dir.join("reexport");
    std::fs::create_dir_all(&again).map_err(|e| monotonic_control::Error::Io {
        path: again.clone(),
        source: e,
    })?;
    for path in write_exports(&doc, &again, "export_demo", &[OutputKind::Fields])? {
        println!("re-exported {}", path.display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("results/export_demo"), PathBuf::from);
    run_example(&dir)
}
