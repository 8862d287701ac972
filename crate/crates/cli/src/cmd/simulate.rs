use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use hmsim_core::data::ADAPTER_SCENARIO_JSON;
use hmsim_core::perf::{compare, run_scenario, CostReport, ScenarioConfig};

use super::SCHEMA_VERSION;
use crate::error::CliResult;
use crate::io::{
    csv_string, load_profile, load_scenario, sha256_hex, to_json, write_bytes, Loaded,
};
use crate::{Cli, OutputFormat};

pub const REPORT_FILE: &str = "report.json";
pub const CSV_FILE: &str = "report.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Contents of `report.json`. Deterministic for identical inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub schema_version: u32,
    pub manifest: String,
    /// Digest over the scenario, profile and baseline bytes.
    pub input_sha256: String,
    pub report: CostReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInputs {
    pub scenario: Option<PathBuf>,
    pub profile: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
}

/// Everything needed to reproduce a run, plus when it happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub created_unix_s: u64,
    pub seed: u64,
    pub inputs: RunInputs,
    pub scenario: ScenarioConfig,
    pub outputs: Vec<PathBuf>,
}

pub fn report_rows(report: &CostReport) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = report
        .rows()
        .into_iter()
        .map(|(m, c, v)| vec![m.to_string(), c.to_string(), v.to_string()])
        .collect();
    if let Some(r) = &report.ratios {
        for (c, v) in [
            ("area", r.area),
            ("energy", r.energy),
            ("latency", r.latency),
        ] {
            rows.push(vec![
                format!("ratio_vs_{}", r.baseline),
                c.to_string(),
                v.to_string(),
            ]);
        }
    }
    rows
}

pub fn report_csv(report: &CostReport) -> String {
    csv_string(&["metric", "component", "value"], report_rows(report))
}

fn scenario_or_default(path: Option<&Path>) -> CliResult<Loaded<ScenarioConfig>> {
    match path {
        Some(p) => load_scenario(p),
        None => Ok(Loaded {
            value: ScenarioConfig::from_json(ADAPTER_SCENARIO_JSON)?,
            path: None,
            text: ADAPTER_SCENARIO_JSON.to_string(),
        }),
    }
}

pub fn run(cli: &Cli, baseline: Option<&Path>) -> CliResult<String> {
    let scenario = scenario_or_default(cli.single_scenario()?)?;
    let profile = load_profile(cli.profile.as_deref())?;
    let mut report = run_scenario(&scenario.value, &profile.value)?;

    let mut digest_parts = vec![scenario.text.as_bytes(), profile.text.as_bytes()];
    let base = baseline.map(load_scenario).transpose()?;
    if let Some(b) = &base {
        let base_report = run_scenario(&b.value, &profile.value)?;
        report.ratios = Some(compare(&report, &base_report)?);
        digest_parts.push(b.text.as_bytes());
    }

    let out = SimulateOutput {
        schema_version: SCHEMA_VERSION,
        manifest: MANIFEST_FILE.to_string(),
        input_sha256: sha256_hex(&digest_parts),
        report,
    };
    let dir = cli.out_dir();
    let json = to_json(&out);
    let csv = report_csv(&out.report);
    write_bytes(&dir.join(REPORT_FILE), json.as_bytes())?;
    write_bytes(&dir.join(CSV_FILE), csv.as_bytes())?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "simulate".into(),
        created_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        seed: cli.seed,
        inputs: RunInputs {
            scenario: scenario.path,
            profile: profile.path,
            baseline: base.and_then(|b| b.path),
        },
        scenario: scenario.value,
        outputs: vec![dir.join(REPORT_FILE), dir.join(CSV_FILE)],
    };
    write_bytes(&dir.join(MANIFEST_FILE), to_json(&manifest).as_bytes())?;

    Ok(match cli.format {
        Some(OutputFormat::Csv) => csv,
        _ => json,
    })
}
