use std::path::Path;

use serde::{Deserialize, Serialize};

use hmsim_core::compression::{cumulative_sparsity, find_csp_1d, find_csp_2d, SparsityPoint};
use hmsim_core::model::{count_partition, worst_case_task, ModelSpec, TaskSpec};

use super::SCHEMA_VERSION;
use crate::error::{CliError, CliResult};
use crate::io::{load_scenario, read_csv, to_json};
use crate::Cli;

#[derive(Debug, Deserialize)]
struct GridRow {
    s_embd: f64,
    s_tf: f64,
    accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspOutput {
    pub schema_version: u32,
    pub baseline: f64,
    pub p_embd: f64,
    pub p_tf: f64,
    pub point: SparsityPoint,
    pub cumulative: f64,
    /// Set when no grid point met the baseline.
    pub fallback: bool,
    /// Best cumulative sparsity pruning only the embeddings.
    pub embedding_only: f64,
    /// Best cumulative sparsity pruning only the transformer.
    pub transformer_only: f64,
}

pub fn load_grid(path: &Path) -> CliResult<Vec<SparsityPoint>> {
    read_csv::<GridRow>(path)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            SparsityPoint::new(r.s_embd, r.s_tf, r.accuracy)
                .map_err(|e| CliError::Schema(format!("{} row {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn solve(
    grid: &[SparsityPoint],
    baseline: f64,
    model: &ModelSpec,
    task: &TaskSpec,
) -> CliResult<CspOutput> {
    let p = count_partition(model, task);
    let out = find_csp_2d(grid, baseline, &p)?;
    let axis = |pick: fn(&SparsityPoint) -> Option<f64>| -> CliResult<f64> {
        let curve: Vec<(f64, f64)> = grid
            .iter()
            .filter_map(|pt| pick(pt).map(|s| (s, pt.accuracy)))
            .collect();
        Ok(if curve.is_empty() {
            0.0
        } else {
            find_csp_1d(&curve, baseline)?
        })
    };
    let s_e = axis(|pt| (pt.s_tf == 0.0).then_some(pt.s_embd))?;
    let s_t = axis(|pt| (pt.s_embd == 0.0).then_some(pt.s_tf))?;
    Ok(CspOutput {
        schema_version: SCHEMA_VERSION,
        baseline,
        p_embd: p.p_embd(),
        p_tf: p.p_tf(),
        point: out.point,
        cumulative: out.cumulative,
        fallback: out.fallback,
        embedding_only: cumulative_sparsity(s_e, 0.0, &p),
        transformer_only: cumulative_sparsity(0.0, s_t, &p),
    })
}

/// Parameter shares come from the scenario's worst-case task, or from the
/// default model with a 64/64 adapter, two-label task.
pub fn run(cli: &Cli, grid: &Path, baseline: f64) -> CliResult<String> {
    let points = load_grid(grid)?;
    let (model, task) = match cli.single_scenario()? {
        Some(path) => {
            let s = load_scenario(path)?.value;
            let t = worst_case_task(&s.model, &s.tasks)?.clone();
            (s.model, t)
        }
        None => (ModelSpec::default(), TaskSpec::new("default", 2, [64, 64])),
    };
    Ok(to_json(&solve(&points, baseline, &model, &task)?))
}
