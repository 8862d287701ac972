//! Reference inputs shipped with the crate.

/// Technology library every acceptance run is evaluated against.
pub const DEFAULT_PROFILE_JSON: &str = include_str!("../data/default_profile.json");

/// Three tasks visited round-robin, one inference per visit, with the
/// backbone in RRAM.
pub const ADAPTER_SCENARIO_JSON: &str = include_str!("../data/adapter_round_robin.json");

/// Same workload with the fine-tuned transformer held in SRAM.
pub const VANILLA_SCENARIO_JSON: &str = include_str!("../data/vanilla_round_robin.json");

/// Synthetic accuracy surface over (s_embd, s_tf). Baseline accuracy 84.0;
/// the isolated critical points sit at cumulative sparsities 0.188 and 0.412
/// for the default model.
pub const SPARSITY_GRID_CSV: &str = include_str!("../data/sparsity_grid.csv");

pub const SPARSITY_GRID_BASELINE: f64 = 84.0;

/// Accuracy per adapter size for a single task.
pub const VASE_GRID_CSV: &str = include_str!("../data/vase_grid.csv");
