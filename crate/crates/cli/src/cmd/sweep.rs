use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hmsim_core::compression::ValueFormat;
use hmsim_core::perf::{run_scenario, ScenarioConfig};

use super::SCHEMA_VERSION;
use crate::error::{CliError, CliResult};
use crate::io::{csv_string, load_profile, load_scenario, to_json, write_bytes};
use crate::{Cli, OutputFormat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub placement: String,
    pub format: ValueFormat,
    pub inferences_per_visit: Option<u64>,
    pub area_mm2: f64,
    pub energy_per_inference_pj: f64,
    pub latency_per_inference_ns: f64,
    pub switch_count: u64,
    pub report: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub schema_version: u32,
    pub rows: Vec<SweepRow>,
}

struct Job {
    scenario: ScenarioConfig,
    label: String,
    per_visit: Option<u64>,
}

/// Expands every `--scenario` over the requested formats and
/// inferences-per-visit, runs the jobs on a worker pool and writes one
/// report per job plus a summary table.
pub fn run(cli: &Cli, fmts: &[ValueFormat], inferences: &[u64]) -> CliResult<String> {
    if cli.scenario.is_empty() {
        return Err(CliError::Usage(
            "sweep needs at least one --scenario".into(),
        ));
    }
    if inferences.contains(&0) {
        return Err(CliError::Usage(
            "--inferences values must be positive".into(),
        ));
    }
    let profile = load_profile(cli.profile.as_deref())?.value;
    let mut jobs = Vec::new();
    for (i, path) in cli.scenario.iter().enumerate() {
        let base = load_scenario(path)?.value;
        let formats: Vec<ValueFormat> = if fmts.is_empty() {
            vec![base.format]
        } else {
            fmts.to_vec()
        };
        let per_visit: Vec<Option<u64>> = if inferences.is_empty() {
            vec![None]
        } else {
            inferences.iter().copied().map(Some).collect()
        };
        for &f in &formats {
            for &k in &per_visit {
                let mut s = base.clone();
                s.format = f;
                if let Some(k) = k {
                    s.schedule.iter_mut().for_each(|v| v.inferences = k);
                }
                let stem = if base.name.is_empty() {
                    format!("scenario{i}")
                } else {
                    base.name.clone()
                };
                let label = match k {
                    Some(k) => format!("{i:02}-{stem}-{f}-k{k}"),
                    None => format!("{i:02}-{stem}-{f}"),
                };
                jobs.push(Job {
                    scenario: s,
                    label,
                    per_visit: k,
                });
            }
        }
    }

    let dir = cli.out_dir();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|job| -> CliResult<SweepRow> {
            let report = run_scenario(&job.scenario, &profile)?;
            let file = format!("{}.json", job.label);
            write_bytes(&dir.join("sweep").join(&file), to_json(&report).as_bytes())?;
            Ok(SweepRow {
                scenario: job.scenario.name.clone(),
                placement: job.scenario.placement.to_string(),
                format: job.scenario.format,
                inferences_per_visit: job.per_visit,
                area_mm2: report.area_mm2,
                energy_per_inference_pj: report.energy_per_inference_pj,
                latency_per_inference_ns: report.latency_per_inference_ns,
                switch_count: report.switch_count,
                report: format!("sweep/{file}"),
            })
        })
        .collect::<CliResult<_>>()?;

    let out = SweepOutput {
        schema_version: SCHEMA_VERSION,
        rows,
    };
    let csv = csv_string(
        &[
            "scenario",
            "placement",
            "format",
            "inferences_per_visit",
            "area_mm2",
            "energy_per_inference_pj",
            "latency_per_inference_ns",
            "switch_count",
            "report",
        ],
        out.rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                r.placement.clone(),
                r.format.to_string(),
                r.inferences_per_visit
                    .map(|k| k.to_string())
                    .unwrap_or_default(),
                r.area_mm2.to_string(),
                r.energy_per_inference_pj.to_string(),
                r.latency_per_inference_ns.to_string(),
                r.switch_count.to_string(),
                r.report.clone(),
            ]
        }),
    );
    let json = to_json(&out);
    write_bytes(&dir.join("sweep.csv"), csv.as_bytes())?;
    write_bytes(&dir.join("sweep.json"), json.as_bytes())?;
    Ok(match cli.format {
        Some(OutputFormat::Csv) => csv,
        _ => json,
    })
}
