// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    fidelity_p, projection, propagate_forward, propagate_unitary, ControlSet, Objective,
};
use crate::error::{Error, Result};
use crate::experiments::{write_file, SweepParameter};
use crate::optimizer::{IterationRecord, OptimizationConfig, RunHistory, Termination};
use crate::spin::SpinChainModel;

/// On-disk form of a [`RunHistory`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryDocument {
    pub config: OptimizationConfig,
    pub records: Vec<IterationRecord>,
    #[serde(rename = "final")]
    pub final_state: FinalDocument,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalDocument {
    #[serde(rename = "T")]
    pub duration: f64,
    #[serde(rename = "P")]
    pub fidelity: f64,
    pub fields: FieldsDocument,
}

/// Channel-major field samples on the midpoint grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldsDocument {
    pub channels: Vec<String>,
    #[serde(rename = "N")]
    pub grid: usize,
    pub samples: Vec<Vec<f64>>,
}

impl HistoryDocument {
    pub fn from_history(history: &RunHistory) -> Result<Self> {
        let model = history.config.build_model()?;
        let fields = &history.final_fields;
        Ok(Self {
            config: history.config.clone(),
            records: history.records.clone(),
            final_state: FinalDocument {
                duration: history.final_duration,
                fidelity: history.final_fidelity,
                fields: FieldsDocument {
                    channels: model.channel_labels().to_vec(),
                    grid: fields.grid(),
                    samples: (0..fields.channels()).map(|j| fields.channel(j)).collect(),
                },
            },
            termination: history.termination,
        })
    }
}

impl FinalDocument {
    pub fn controls(&self) -> Result<ControlSet> {
        let f = &self.fields;
        if f.samples.len() != f.channels.len() || f.samples.iter().any(|c| c.len() != f.grid) {
            return Err(Error::InvalidConfig(format!(
                "history fields must hold {} channels of {} samples",
                f.channels.len(),
                f.grid
            )));
        }
        ControlSet::from_channels(&f.samples, self.duration)
    }
}

pub fn write_history_json(path: &Path, history: &RunHistory) -> Result<()> {
    let doc = HistoryDocument::from_history(history)?;
    let mut body = serde_json::to_string_pretty(&doc)?;
    body.push('\n');
    write_file(path, &body)
}

pub fn load_history(path: &Path) -> Result<HistoryDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Decimal text of `x` rounded to `digits` significant digits, trailing zeros dropped.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn num(x: f64) -> String {
    format_significant(x, 12)
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
}

/// `k,J,T,P,fluence`, one row per iteration.
pub fn export_history_csv(records: &[IterationRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "J", "T", "P", "fluence"])?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            num(r.cost),
            num(r.duration),
            num(r.fidelity),
            num(r.fluence),
        ])?;
    }
    finish(w)
}

/// `s,t,E_<label>…` at the interval midpoints, `t = s T`.
pub fn export_fields_csv(fields: &ControlSet, labels: &[String]) -> Result<String> {
    if labels.len() != fields.channels() {
        return Err(Error::DimensionMismatch {
            expected: fields.channels(),
            found: labels.len(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = ["s".to_string(), "t".to_string()]
        .into_iter()
        .chain(labels.iter().map(|l| format!("E_{l}")))
        .collect();
    w.write_record(&header)?;
    for (k, s) in fields.midpoints().enumerate() {
        let row: Vec<String> = [num(s), num(s * fields.duration())]
            .into_iter()
            .chain(fields.amplitudes(k).iter().map(|&e| num(e)))
            .collect();
        w.write_record(&row)?;
    }
    finish(w)
}

/// `s,P(s)` at the grid points `s = k/N`, `k = 0..=N`.
pub fn export_probability_csv(
    model: &SpinChainModel,
    fields: &ControlSet,
    objective: &Objective,
) -> Result<String> {
    let values: Vec<f64> = match objective {
        Objective::Gate(target) => propagate_unitary(model, fields)?
            .points()
            .iter()
            .map(|u| fidelity_p(u, target, model.spins()))
            .collect::<Result<_>>()?,
        Objective::StateTransfer { initial, target } => propagate_forward(model, fields, initial)?
            .points()
            .iter()
            .map(|psi| projection(target, psi))
            .collect(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["s", "P(s)"])?;
    let n = fields.grid();
    for (k, p) in values.iter().enumerate() {
        w.write_record([num(k as f64 / n as f64), num(*p)])?;
    }
    finish(w)
}

/// `<param>,T_f,P`, one row per sweep value.
pub fn sweep_summary_csv(parameter: SweepParameter, rows: &[(f64, &RunHistory)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([parameter.as_str(), "T_f", "P"])?;
    for (value, history) in rows {
        w.write_record([
            num(*value),
            num(history.final_duration),
            num(history.final_fidelity),
        ])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{Optimizer, TimeUpdate};

    fn record(k: usize, cost: f64) -> IterationRecord {
        IterationRecord {
            k,
            cost,
            duration: 0.5 + 1e-3 * k as f64,
            fidelity: 0.4 + 0.01 * k as f64,
            fluence: 1.0 / 3.0,
            delta_field: 0.0,
            delta_time: 0.0,
        }
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1.0, 12), "1");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(-2.0 / 3.0, 12), "-0.666666666667");
        assert_eq!(format_significant(123456.789, 12), "123456.789");
        assert_eq!(format_significant(1.5e-9, 12), "1.5e-9");
        assert_eq!(format_significant(6.02214076e23, 12), "6.02214076e23");
        assert_eq!(format_significant(9.9999999999999, 12), "10");
    }

    #[test]
    fn history_csv_rows_and_round_trip() {
        let records: Vec<_> = (1..=3).map(|k| record(k, 3.0 + k as f64 / 7.0)).collect();
        let text = export_history_csv(&records).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(
            reader.headers().unwrap(),
            vec!["k", "J", "T", "P", "fluence"]
        );
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        for (row, r) in rows.iter().zip(&records) {
            let j: f64 = row[1].parse().unwrap();
            assert!((j - r.cost).abs() <= 5e-12 * r.cost.abs());
            // Re-exporting the parsed value reproduces the same text.
            assert_eq!(num(j), row[1]);
        }
        assert!(matches!(export_history_csv(&[]), Err(Error::EmptyHistory)));
    }

    #[test]
    fn fields_csv_layout() {
        let fields = ControlSet::from_fn(4, 10, 2.0, |j, s| j as f64 + s).unwrap();
        let labels: Vec<String> = ["1x", "1y", "2x", "2y"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let text = export_fields_csv(&fields, &labels).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(
            reader.headers().unwrap(),
            vec!["s", "t", "E_1x", "E_1y", "E_2x", "E_2y"]
        );
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 10);
        let t_max = rows
            .iter()
            .map(|r| r[1].parse::<f64>().unwrap())
            .fold(0.0, f64::max);
        assert!((t_max - 2.0 * (1.0 - 1.0 / 20.0)).abs() < 1e-12);
        assert!(export_fields_csv(&fields, &labels[..3]).is_err());
    }

    #[test]
    fn probability_csv_endpoints() {
        let config = OptimizationConfig {
            grid: 50,
            max_iter: 3,
            time_update: TimeUpdate::Frozen,
            seed_field: crate::optimizer::SeedField::Constant(0.3),
            ..Default::default()
        };
        let history = Optimizer::new(config.clone()).unwrap().run();
        let model = config.build_model().unwrap();
        let objective = config.build_objective().unwrap();
        let text = export_probability_csv(&model, &history.final_fields, &objective).unwrap();
        let rows: Vec<Vec<f64>> = csv::Reader::from_reader(text.as_bytes())
            .records()
            .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 51);
        // P(0) is the projection of the identity onto CNOT.
        assert_eq!(rows[0], vec![0.0, 0.5]);
        assert_eq!(rows[50][0], 1.0);
        assert!((rows[50][1] - history.final_fidelity).abs() < 1e-11);
    }

    #[test]
    fn history_document_round_trip() {
        let config = OptimizationConfig {
            grid: 20,
            max_iter: 2,
            seed_field: crate::optimizer::SeedField::Constant(0.1),
            ..Default::default()
        };
        let history = Optimizer::new(config).unwrap().run();
        let doc = HistoryDocument::from_history(&history).unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["config", "records", "final", "termination"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["termination"], "max_iter");
        assert_eq!(value["final"]["fields"]["N"], 20);
        assert_eq!(value["final"]["fields"]["channels"][3], "2y");
        let rec = &value["records"][0];
        for key in ["k", "J", "T", "P", "fluence", "dJ_field", "dJ_time"] {
            assert!(rec.get(key).is_some(), "record missing {key}");
        }
        let back: HistoryDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.final_state.controls().unwrap(), history.final_fields);
    }
}
