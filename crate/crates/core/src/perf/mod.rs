//! Energy, latency and area of multi-task inference on a provisioned design.

mod cost;
mod report;
mod scenario;

pub use cost::{
    activation_traffic, compute_work, inference_cost, switch_bits, switch_cost, weight_traffic,
    ActivationTraffic, EventCost, ProvisionedSystem, WeightTraffic,
};
pub use report::{
    compare, run_scenario, AreaBreakdown, CostReport, EnergyBreakdown, LatencyBreakdown, Ratios,
    REPORT_SCHEMA_VERSION,
};
pub use scenario::{DatapathSpec, ScenarioConfig, Visit, SCENARIO_SCHEMA_VERSION};
