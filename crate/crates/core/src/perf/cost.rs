//! Analytical per-inference and per-switch costs.
//!
//! Weights are streamed from the scratchpad on every pass of the shared
//! layer. Reads from different technologies overlap; an inference takes as
//! long as the slowest of compute, weight streaming and activation traffic.
//! MAC energy is not modeled.

use serde::{Deserialize, Serialize};

use super::ScenarioConfig;
use crate::error::Result;
use crate::memory::{
    access_cost, provision, surviving, AccessCost, AccessOp, MacroPlan, MacroPlanEntry, MemoryKind,
    Placement, TechLibrary,
};
use crate::model::{count_partition, ModelSpec, PartitionedCounts, TaskSpec};

/// MACs of one forward pass over `seq_len` tokens with the given adapter
/// bottlenecks (zero for no adapter).
pub fn compute_work(model: &ModelSpec, seq_len: u64, adapter_sizes: [u64; 2]) -> u64 {
    let (l, e, h, f) = (seq_len, model.embed_dim, model.hidden_dim, model.ffn_dim);
    let per_layer = 4 * l * h * h + 2 * l * l * h + 2 * l * h * f;
    let adapters = 2 * l * h * (adapter_sizes[0] + adapter_sizes[1]);
    model.num_layers * (per_layer + adapters) + l * e * h
}

/// Bits read from each technology for one inference.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightTraffic {
    pub sram_bits: f64,
    pub slc_bits: f64,
    pub mlc_bits: f64,
}

/// Element counts of activation reads and writes for one inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActivationTraffic {
    pub reads: u64,
    pub writes: u64,
}

/// The three on-chip plans plus the DRAM channel used for reloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvisionedSystem {
    pub on_chip: MacroPlan,
    pub dram: MacroPlanEntry,
}

impl ProvisionedSystem {
    pub fn build(scenario: &ScenarioConfig, lib: &TechLibrary) -> Result<Self> {
        let (sram, slc, mlc) = scenario.requirement()?.provisioned_bytes();
        Ok(Self {
            on_chip: MacroPlan {
                sram: provision(sram, lib.get(MemoryKind::Sram)?)?,
                slc_rram: provision(slc, lib.get(MemoryKind::SlcRram)?)?,
                mlc_rram: provision(mlc, lib.get(MemoryKind::MlcRram)?)?,
            },
            dram: MacroPlanEntry::channel(lib.get(MemoryKind::Dram)?)?,
        })
    }
}

/// Energy and time of one event, itemized.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EventCost {
    pub weight_read_pj: f64,
    pub activation_pj: f64,
    pub dram_switch_pj: f64,
    pub leakage_pj: f64,
    pub compute_ns: f64,
    pub weight_read_ns: f64,
    pub activation_ns: f64,
    pub time_ns: f64,
}

impl EventCost {
    pub fn energy_pj(&self) -> f64 {
        self.weight_read_pj + self.activation_pj + self.dram_switch_pj + self.leakage_pj
    }
}

fn density(nnz: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        nnz as f64 / n as f64
    }
}

fn adapter_copy(model: &ModelSpec, counts: &PartitionedCounts) -> u64 {
    if model.share_adapters_across_layers || model.num_layers == 0 {
        counts.adapters
    } else {
        counts.adapters / model.num_layers
    }
}

/// Placement-specific view of a task: vanilla models carry no adapters.
fn effective_task(placement: Placement, task: &TaskSpec) -> TaskSpec {
    match placement {
        Placement::AdapterAlbert => task.clone(),
        Placement::VanillaAlbert => task.without_adapters(),
    }
}

/// Weight bits streamed per inference, split by technology.
pub fn weight_traffic(scenario: &ScenarioConfig, task: &TaskSpec) -> WeightTraffic {
    let m = &scenario.model;
    let task = effective_task(scenario.placement, task);
    let c = count_partition(m, &task);
    let vb = scenario.format.bits() as f64;
    let passes = m.num_layers as f64;
    let l = scenario.seq_len;

    let d_embd = density(
        surviving(c.backbone_embedding(), scenario.s_embd),
        c.backbone_embedding(),
    );
    let d_tf = density(
        surviving(c.backbone_transformer(), scenario.s_tf),
        c.backbone_transformer(),
    );

    // one row per token from each of the three tables, plus the projection
    let embd = (3 * l * m.embed_dim + c.embedding_projection) as f64;
    let mut t = WeightTraffic {
        slc_bits: embd,
        mlc_bits: embd * d_embd * vb,
        ..Default::default()
    };

    let transformer = c.shared_layer() as f64 * passes + c.pooler as f64;
    match scenario.placement {
        Placement::AdapterAlbert => {
            t.slc_bits += transformer;
            t.mlc_bits += transformer * d_tf * vb;
        }
        Placement::VanillaAlbert => {
            t.sram_bits += transformer + transformer * d_tf * vb;
        }
    }

    let embd_norm = 2 * m.embed_dim;
    let per_pass = adapter_copy(m, &c) + (c.layer_norms - embd_norm);
    t.sram_bits += (per_pass as f64 * passes + (embd_norm + c.classifier) as f64) * vb;
    t
}

/// Activation elements moved through SRAM per inference.
pub fn activation_traffic(
    model: &ModelSpec,
    seq_len: u64,
    adapter_sizes: [u64; 2],
) -> ActivationTraffic {
    let (l, e, h, f) = (seq_len, model.embed_dim, model.hidden_dim, model.ffn_dim);
    let scores = model.num_heads * l * l;
    // embeddings: write the looked-up rows, read them for the projection,
    // write the hidden states
    let mut reads = l * e;
    let mut writes = l * e + l * h;
    // per pass: QKV from x, scores from Q and K, context from P and V,
    // output projection, residual + norm, FFN in/out, residual + norm
    let layer_reads =
        l * h + 2 * l * h + (scores + l * h) + l * h + 2 * l * h + l * h + l * f + 2 * l * h;
    let layer_writes = 3 * l * h + scores + l * h + l * h + l * h + l * f + l * h + l * h;
    let mut adapter_reads = 0;
    let mut adapter_writes = 0;
    for s in adapter_sizes.into_iter().filter(|&s| s > 0) {
        adapter_reads += l * h + l * s + l * h;
        adapter_writes += l * s + l * h;
    }
    reads += model.num_layers * (layer_reads + adapter_reads);
    writes += model.num_layers * (layer_writes + adapter_writes);
    // pooler and classifier act on the first token only
    reads += 2 * h;
    writes += h;
    ActivationTraffic { reads, writes }
}

fn leakage_pj(sys: &ProvisionedSystem, time_ns: f64) -> f64 {
    // nW * ns = 1e-6 pJ
    sys.on_chip.sram.leakage_power_nw() * time_ns * 1e-6
}

/// Steady-state cost of one inference of `task`.
pub fn inference_cost(
    scenario: &ScenarioConfig,
    task: &TaskSpec,
    sys: &ProvisionedSystem,
) -> Result<EventCost> {
    let plans = &sys.on_chip;
    let eff = effective_task(scenario.placement, task);
    let w = weight_traffic(scenario, task);

    let reads = [
        access_cost(&plans.sram, w.sram_bits / 8.0, AccessOp::Read)?,
        access_cost(&plans.slc_rram, w.slc_bits / 8.0, AccessOp::Read)?,
        access_cost(&plans.mlc_rram, w.mlc_bits / 8.0, AccessOp::Read)?,
    ];
    let weight_read_pj = reads.iter().map(|r| r.energy_pj).sum();
    let weight_read_ns = reads.iter().map(|r| r.time_ns).fold(0.0, f64::max);

    let a = activation_traffic(&scenario.model, scenario.seq_len, eff.adapter_sizes);
    let vbytes = scenario.format.bits() as f64 / 8.0;
    let act = access_cost(&plans.sram, a.reads as f64 * vbytes, AccessOp::Read)?
        + access_cost(&plans.sram, a.writes as f64 * vbytes, AccessOp::Write)?;

    let macs = compute_work(&scenario.model, scenario.seq_len, eff.adapter_sizes);
    let compute_ns = macs as f64 / scenario.datapath.macs_per_ns();
    let time_ns = compute_ns.max(weight_read_ns).max(act.time_ns);

    Ok(EventCost {
        weight_read_pj,
        activation_pj: act.energy_pj,
        dram_switch_pj: 0.0,
        leakage_pj: leakage_pj(sys, time_ns),
        compute_ns,
        weight_read_ns,
        activation_ns: act.time_ns,
        time_ns,
    })
}

/// Bits reloaded from DRAM when `task` becomes active.
pub fn switch_bits(scenario: &ScenarioConfig, task: &TaskSpec) -> u64 {
    let vb = scenario.format.bits() as u64;
    let c = count_partition(&scenario.model, &effective_task(scenario.placement, task));
    match scenario.placement {
        Placement::AdapterAlbert => c.task_specific() * vb,
        Placement::VanillaAlbert => {
            (surviving(c.backbone_transformer(), scenario.s_tf) + c.norms_and_head()) * vb
        }
    }
}

/// Cost of replacing `from`'s task-specific state with `to`'s: a DRAM read
/// followed by an SRAM write, back to back.
pub fn switch_cost(
    from: &TaskSpec,
    to: &TaskSpec,
    scenario: &ScenarioConfig,
    sys: &ProvisionedSystem,
) -> Result<EventCost> {
    if from.task_id == to.task_id {
        return Ok(EventCost::default());
    }
    let bytes = switch_bits(scenario, to) as f64 / 8.0;
    let moved: AccessCost = access_cost(&sys.dram, bytes, AccessOp::Read)?
        + access_cost(&sys.on_chip.sram, bytes, AccessOp::Write)?;
    Ok(EventCost {
        dram_switch_pj: moved.energy_pj,
        leakage_pj: leakage_pj(sys, moved.time_ns),
        time_ns: moved.time_ns,
        ..Default::default()
    })
}
