//! Config file schemas and the error-to-exit-code mapping.

use echocycle::analysis::AnalysisError;
use echocycle::hadamard::HadamardError;
use echocycle::schemes::{SchemeError, SchemeKind};
use echocycle::simulator::{NoiseModel, SequenceKind, SimError};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::Budget(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::RowBudgetExceeded { .. } | SchemeError::TooManyPulses { .. } => {
                CliError::Budget(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<HadamardError> for CliError {
    fn from(e: HadamardError) -> Self {
        match e {
            HadamardError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NoConvergence(_) | AnalysisError::DegenerateData => {
                CliError::NonConvergence(e.to_string())
            }
            AnalysisError::Scheme(s) => s.into(),
            AnalysisError::Sim(s) => s.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("json: {e}"))
    }
}

/// Noise block as written in config files; omitted relaxation times mean
/// no relaxation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    #[serde(default)]
    pub detuning_sigma: f64,
    #[serde(default)]
    pub flip_error: f64,
    #[serde(default)]
    pub phase_error: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { t1: None, t2: None, detuning_sigma: 0.0, flip_error: 0.0, phase_error: 0.0 }
    }
}

impl NoiseSpec {
    pub fn to_model(self, seed: u64) -> NoiseModel {
        NoiseModel {
            t1: self.t1.unwrap_or(f64::INFINITY),
            t2: self.t2.unwrap_or(f64::INFINITY),
            detuning_sigma: self.detuning_sigma,
            flip_error: self.flip_error,
            phase_error: self.phase_error,
            seed,
        }
    }
}

/// `--noise` accepts inline JSON or a path to a JSON file.
pub fn parse_noise(arg: &str) -> Result<NoiseSpec, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        let path = PathBuf::from(arg);
        std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?
    };
    Ok(serde_json::from_str(&text)?)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SchemeRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SchemeKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum SimulateTask {
    /// Per-row and combined traces for one sequence.
    #[default]
    Trace,
    /// Apparent-T2 sweep: echo amplitude vs total time, fitted per scheme.
    Decay,
    /// Echo amplitude vs pulse count at fixed spacing.
    SweepM,
    /// Modified two-pulse experiment splitting the desired and
    /// coherence-population-mixing channels.
    Split,
}


fn default_ensemble() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub task: SimulateTask,
    pub sequence: SequenceSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub scheme: SchemeRef,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default)]
    pub seed: u64,
    /// Decay task: list of tau values (CP/CPMG) or total times (UDD).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_taus: Option<Vec<f64>>,
    /// Sweep-m task: pulse counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_m: Option<Vec<usize>>,
    /// Sweep-m task: schemes to compare (defaults to tpc + hpc).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_schemes: Option<Vec<SchemeKind>>,
    /// Split task: storage intervals between the two inversion pulses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage_times: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FidelityConfig {
    pub family: SequenceKind,
    pub m_list: Vec<usize>,
    pub scheme: SchemeKind,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Reads a config file, unwrapping a manifest's embedded `config` when one
/// is passed instead (so a run can be reproduced from its manifest).
pub fn read_config<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let body = match value.get("config") {
        Some(inner) => inner.clone(),
        None => value,
    };
    Ok(serde_json::from_value(body)?)
}
