use std::path::Path;

use serde::{Deserialize, Serialize};

use hmsim_core::model::{vase_select, VaseMode};

use super::SCHEMA_VERSION;
use crate::error::CliResult;
use crate::io::{read_csv, to_json};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaseRow {
    pub adapter_size: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaseOutput {
    pub schema_version: u32,
    pub baseline: f64,
    pub mode: VaseMode,
    pub selected_size: u64,
    pub grid: Vec<VaseRow>,
}

pub fn run(grid: &Path, baseline: f64, mode: VaseMode) -> CliResult<String> {
    let rows: Vec<VaseRow> = read_csv(grid)?;
    let pairs: Vec<(u64, f64)> = rows.iter().map(|r| (r.adapter_size, r.accuracy)).collect();
    let selected_size = vase_select(&pairs, baseline, mode)?;
    Ok(to_json(&VaseOutput {
        schema_version: SCHEMA_VERSION,
        baseline,
        mode,
        selected_size,
        grid: rows,
    }))
}
