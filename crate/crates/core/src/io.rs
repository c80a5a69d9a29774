//! Strict loaders for datasets (CSV), models (JSON), and games (JSON).

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{AfaError, Result};
use crate::game::CoalitionGame;
use crate::model::{Dataset, PredictionModel};

/// Parses comma-separated reals. The first line is a header when any of its
/// cells is not a number.
pub fn parse_dataset_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names = None;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            let message = match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("ragged row: {len} fields, expected {expected_len}")
                }
                _ => e.to_string(),
            };
            AfaError::Parse { line, column: 0, message }
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        if i == 0 && parsed.iter().any(Option::is_none) {
            names = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let row = parsed
            .into_iter()
            .enumerate()
            .map(|(col, v)| {
                v.ok_or_else(|| AfaError::Parse {
                    line,
                    column: col + 1,
                    message: format!("'{}' is not a number", &record[col]),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Dataset::new(rows, names).map_err(|e| match e {
        AfaError::Parse { .. } => e,
        other => AfaError::Validation(other.to_string()),
    })
}

/// Syntax errors become [`AfaError::Parse`]; schema and invariant violations
/// (unknown keys, wrong table length, bad indices) become
/// [`AfaError::Validation`].
fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => AfaError::Validation(e.to_string()),
        _ => AfaError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
    })
}

pub fn parse_model_json(text: &str) -> Result<PredictionModel> {
    parse_json(text)
}

pub fn parse_game_json(text: &str) -> Result<CoalitionGame> {
    parse_json(text)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| AfaError::Io(format!("{}: {e}", path.display())))
}

pub fn load_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_dataset_csv(&read(path.as_ref())?)
}

pub fn load_model_json(path: impl AsRef<Path>) -> Result<PredictionModel> {
    parse_model_json(&read(path.as_ref())?)
}

pub fn load_game_json(path: impl AsRef<Path>) -> Result<CoalitionGame> {
    parse_game_json(&read(path.as_ref())?)
}
