use serde::{Deserialize, Serialize};

use super::cost::{inference_cost, switch_cost, EventCost, ProvisionedSystem};
use super::ScenarioConfig;
use crate::compression::ValueFormat;
use crate::error::{Error, Result};
use crate::memory::{FootprintRequirement, MacroPlan, Placement, TechLibrary};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaBreakdown {
    pub sram_mm2: f64,
    pub slc_rram_mm2: f64,
    pub mlc_rram_mm2: f64,
}

/// Per-inference energy, amortized over the whole schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub weight_read_pj: f64,
    pub activation_pj: f64,
    pub dram_switch_pj: f64,
    pub leakage_pj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub inference_ns: f64,
    pub dram_switch_ns: f64,
}

/// Baseline metric divided by report metric; above 1 is an improvement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub baseline: String,
    pub area: f64,
    pub energy: f64,
    pub latency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub schema_version: u32,
    pub scenario: String,
    pub placement: Placement,
    pub format: ValueFormat,
    pub area_mm2: f64,
    pub energy_per_inference_pj: f64,
    pub latency_per_inference_ns: f64,
    pub area: AreaBreakdown,
    pub energy: EnergyBreakdown,
    pub latency: LatencyBreakdown,
    pub switch_count: u64,
    pub total_inferences: u64,
    pub footprint: FootprintRequirement,
    pub plans: MacroPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Ratios>,
}

impl CostReport {
    /// Flat `(metric, component, value)` rows, totals included.
    pub fn rows(&self) -> Vec<(&'static str, &'static str, f64)> {
        vec![
            ("area_mm2", "sram", self.area.sram_mm2),
            ("area_mm2", "slc_rram", self.area.slc_rram_mm2),
            ("area_mm2", "mlc_rram", self.area.mlc_rram_mm2),
            ("area_mm2", "total", self.area_mm2),
            (
                "energy_per_inference_pj",
                "weight_read",
                self.energy.weight_read_pj,
            ),
            (
                "energy_per_inference_pj",
                "activation",
                self.energy.activation_pj,
            ),
            (
                "energy_per_inference_pj",
                "dram_switch",
                self.energy.dram_switch_pj,
            ),
            ("energy_per_inference_pj", "leakage", self.energy.leakage_pj),
            (
                "energy_per_inference_pj",
                "total",
                self.energy_per_inference_pj,
            ),
            (
                "latency_per_inference_ns",
                "inference",
                self.latency.inference_ns,
            ),
            (
                "latency_per_inference_ns",
                "dram_switch",
                self.latency.dram_switch_ns,
            ),
            (
                "latency_per_inference_ns",
                "total",
                self.latency_per_inference_ns,
            ),
            ("switch_count", "total", self.switch_count as f64),
        ]
    }
}

/// Evaluates the cyclic schedule on a design provisioned for it.
pub fn run_scenario(scenario: &ScenarioConfig, lib: &TechLibrary) -> Result<CostReport> {
    scenario.validate()?;
    let sys = ProvisionedSystem::build(scenario, lib)?;
    let n = scenario.schedule.len();

    let mut inference = EventCost::default();
    let mut switching = EventCost::default();
    let mut switch_count = 0;
    for (i, visit) in scenario.schedule.iter().enumerate() {
        let task = scenario.task(&visit.task_id)?;
        let prev = scenario.task(&scenario.schedule[(i + n - 1) % n].task_id)?;
        if prev.task_id != task.task_id {
            let s = switch_cost(prev, task, scenario, &sys)?;
            switch_count += 1;
            switching.dram_switch_pj += s.dram_switch_pj;
            switching.leakage_pj += s.leakage_pj;
            switching.time_ns += s.time_ns;
        }
        let c = inference_cost(scenario, task, &sys)?;
        let k = visit.inferences as f64;
        inference.weight_read_pj += c.weight_read_pj * k;
        inference.activation_pj += c.activation_pj * k;
        inference.leakage_pj += c.leakage_pj * k;
        inference.time_ns += c.time_ns * k;
    }

    let total = scenario.total_inferences();
    let per = |x: f64| x / total as f64;
    let energy = EnergyBreakdown {
        weight_read_pj: per(inference.weight_read_pj),
        activation_pj: per(inference.activation_pj),
        dram_switch_pj: per(switching.dram_switch_pj),
        leakage_pj: per(inference.leakage_pj + switching.leakage_pj),
    };
    let latency = LatencyBreakdown {
        inference_ns: per(inference.time_ns),
        dram_switch_ns: per(switching.time_ns),
    };
    let plans = sys.on_chip;
    let area = AreaBreakdown {
        sram_mm2: plans.sram.area_mm2(),
        slc_rram_mm2: plans.slc_rram.area_mm2(),
        mlc_rram_mm2: plans.mlc_rram.area_mm2(),
    };
    Ok(CostReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        placement: scenario.placement,
        format: scenario.format,
        area_mm2: area.sram_mm2 + area.slc_rram_mm2 + area.mlc_rram_mm2,
        energy_per_inference_pj: energy.weight_read_pj
            + energy.activation_pj
            + energy.dram_switch_pj
            + energy.leakage_pj,
        latency_per_inference_ns: latency.inference_ns + latency.dram_switch_ns,
        area,
        energy,
        latency,
        switch_count,
        total_inferences: total,
        footprint: scenario.requirement()?,
        plans,
        ratios: None,
    })
}

/// Baseline-over-report ratios for area, energy and latency.
pub fn compare(report: &CostReport, baseline: &CostReport) -> Result<Ratios> {
    let ratio = |what: &'static str, b: f64, r: f64| -> Result<f64> {
        if b == 0.0 || r == 0.0 {
            return Err(Error::Zero(what));
        }
        Ok(b / r)
    };
    Ok(Ratios {
        baseline: baseline.scenario.clone(),
        area: ratio("area", baseline.area_mm2, report.area_mm2)?,
        energy: ratio(
            "energy per inference",
            baseline.energy_per_inference_pj,
            report.energy_per_inference_pj,
        )?,
        latency: ratio(
            "latency per inference",
            baseline.latency_per_inference_ns,
            report.latency_per_inference_ns,
        )?,
    })
}
