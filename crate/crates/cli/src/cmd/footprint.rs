use serde::{Deserialize, Serialize};

use hmsim_core::compression::ValueFormat;
use hmsim_core::data::ADAPTER_SCENARIO_JSON;
use hmsim_core::memory::{footprint, Accounting, FootprintInput, Placement};
use hmsim_core::perf::ScenarioConfig;

use super::SCHEMA_VERSION;
use crate::error::{CliError, CliResult};
use crate::io::{csv_string, load_scenario, to_json};
use crate::{Cli, OutputFormat};

pub struct Filter {
    pub placement: Option<Placement>,
    pub fmt: Option<ValueFormat>,
    pub accounting: Accounting,
    pub s_embd: Option<f64>,
    pub s_tf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintRow {
    pub placement: Placement,
    pub format: ValueFormat,
    pub mlc_mb: f64,
    pub slc_mb: f64,
    pub sram_mb: f64,
    pub mlc_bits: u64,
    pub slc_bits: u64,
    pub sram_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintOutput {
    pub schema_version: u32,
    pub scenario: String,
    pub accounting: Accounting,
    pub s_embd: f64,
    pub s_tf: f64,
    pub mlc_bits_per_cell: u32,
    pub rows: Vec<FootprintRow>,
}

pub fn compute(scenario: &ScenarioConfig, filter: &Filter) -> CliResult<FootprintOutput> {
    let s_embd = filter.s_embd.unwrap_or(scenario.s_embd);
    let s_tf = filter.s_tf.unwrap_or(scenario.s_tf);
    let mut rows = Vec::new();
    for placement in Placement::ALL {
        if filter.placement.is_some_and(|p| p != placement) {
            continue;
        }
        for format in ValueFormat::STUDY {
            if filter.fmt.is_some_and(|f| f != format) {
                continue;
            }
            let r = footprint(&FootprintInput {
                model: scenario.model,
                tasks: scenario.tasks.clone(),
                s_embd,
                s_tf,
                format,
                placement,
                accounting: filter.accounting,
                mlc_bits_per_cell: scenario.mlc_bits_per_cell,
            })?;
            rows.push(FootprintRow {
                placement,
                format,
                mlc_mb: r.mlc_mb(),
                slc_mb: r.slc_mb(),
                sram_mb: r.sram_mb(),
                mlc_bits: r.mlc_bits,
                slc_bits: r.slc_bits,
                sram_bits: r.sram_bits,
            });
        }
    }
    if rows.is_empty() {
        return Err(CliError::Usage(
            "no placement/format combination matches the filter (formats: fp32, q3_13, q3_5)"
                .into(),
        ));
    }
    Ok(FootprintOutput {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        accounting: filter.accounting,
        s_embd,
        s_tf,
        mlc_bits_per_cell: scenario.mlc_bits_per_cell,
        rows,
    })
}

fn table(out: &FootprintOutput) -> String {
    let mut s = format!(
        "{:<16} {:<7} {:>10} {:>10} {:>10}\n",
        "placement", "format", "MLC (MB)", "SLC (MB)", "SRAM (MB)"
    );
    for r in &out.rows {
        s += &format!(
            "{:<16} {:<7} {:>10.3} {:>10.3} {:>10.3}\n",
            r.placement.name(),
            r.format.to_string(),
            r.mlc_mb,
            r.slc_mb,
            r.sram_mb
        );
    }
    s
}

pub fn run(cli: &Cli, filter: &Filter) -> CliResult<String> {
    let scenario = match cli.single_scenario()? {
        Some(p) => load_scenario(p)?.value,
        None => ScenarioConfig::from_json(ADAPTER_SCENARIO_JSON)?,
    };
    let out = compute(&scenario, filter)?;
    if let Some(dir) = &cli.out_dir {
        crate::io::write_bytes(&dir.join("footprint.json"), to_json(&out).as_bytes())?;
    }
    Ok(match cli.format {
        None => table(&out),
        Some(OutputFormat::Json) => to_json(&out),
        Some(OutputFormat::Csv) => csv_string(
            &["placement", "format", "mlc_mb", "slc_mb", "sram_mb"],
            out.rows.iter().map(|r| {
                vec![
                    r.placement.to_string(),
                    r.format.to_string(),
                    r.mlc_mb.to_string(),
                    r.slc_mb.to_string(),
                    r.sram_mb.to_string(),
                ]
            }),
        ),
    })
}
