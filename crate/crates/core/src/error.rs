// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the control library and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site index {site} out of range for a chain of {spins} spins")]
    SiteOutOfRange { site: usize, spins: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite field sample in channel {channel} at grid index {index}")]
    NonFiniteField { channel: usize, index: usize },

    #[error("grid mismatch: fields have {fields} samples, schedule has {schedule}")]
    GridMismatch { fields: usize, schedule: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "monotonicity guard failed at iteration {iteration}: {substep} changed J by {delta:e}"
    )]
    GuardFailure {
        iteration: usize,
        substep: &'static str,
        delta: f64,
    },

    #[error("history has no records")]
    EmptyHistory,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON history: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed config file: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 2 for configuration errors, 3 for a failed
    /// monotonicity guard, 4 for I/O and file-format errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::GuardFailure { .. } => 3,
            Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
