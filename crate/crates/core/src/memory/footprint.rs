//! Capacity each on-chip technology must hold for a compressed model.
//!
//! Everything is counted in bits so that format changes scale the value
//! columns exactly. MLC capacity is in cell-equivalent bits: stored value
//! bits divided by the bits held per cell.

use serde::{Deserialize, Serialize};

use crate::compression::ValueFormat;
use crate::error::{Error, Result};
use crate::model::{count_partition, ModelSpec, PartitionedCounts, TaskSpec};
use crate::MIB;

/// Where the pruned transformer weights live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Whole backbone in RRAM, only task-specific layers in SRAM.
    AdapterAlbert,
    /// Embeddings in RRAM, fine-tuned transformer and head in SRAM.
    VanillaAlbert,
}

impl Placement {
    pub const ALL: [Placement; 2] = [Placement::AdapterAlbert, Placement::VanillaAlbert];

    pub fn name(&self) -> &'static str {
        match self {
            Placement::AdapterAlbert => "adapter-albert",
            Placement::VanillaAlbert => "vanilla-albert",
        }
    }
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adapter-albert" | "adapter" => Ok(Placement::AdapterAlbert),
            "vanilla-albert" | "vanilla" => Ok(Placement::VanillaAlbert),
            other => Err(Error::field(
                "placement",
                format!("unknown placement `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accounting {
    /// Parameters only; the vanilla transformer bitmask is left out.
    #[default]
    PaperParity,
    /// Adds the vanilla transformer bitmask and a double activation buffer.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintInput {
    pub model: ModelSpec,
    pub tasks: Vec<TaskSpec>,
    pub s_embd: f64,
    pub s_tf: f64,
    pub format: ValueFormat,
    pub placement: Placement,
    pub accounting: Accounting,
    pub mlc_bits_per_cell: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FootprintRequirement {
    pub mlc_bits: u64,
    pub slc_bits: u64,
    pub sram_bits: u64,
}

fn bytes(bits: u64) -> f64 {
    bits as f64 / 8.0
}

impl FootprintRequirement {
    pub fn mlc_bytes(&self) -> f64 {
        bytes(self.mlc_bits)
    }

    pub fn slc_bytes(&self) -> f64 {
        bytes(self.slc_bits)
    }

    pub fn sram_bytes(&self) -> f64 {
        bytes(self.sram_bits)
    }

    pub fn mlc_mb(&self) -> f64 {
        self.mlc_bytes() / MIB
    }

    pub fn slc_mb(&self) -> f64 {
        self.slc_bytes() / MIB
    }

    pub fn sram_mb(&self) -> f64 {
        self.sram_bytes() / MIB
    }

    /// Whole bytes each technology must provide, as (sram, slc, mlc).
    pub fn provisioned_bytes(&self) -> (u64, u64, u64) {
        (
            self.sram_bits.div_ceil(8),
            self.slc_bits.div_ceil(8),
            self.mlc_bits.div_ceil(8),
        )
    }
}

/// Non-zeros left after magnitude pruning `n` weights at `sparsity`.
pub fn surviving(n: u64, sparsity: f64) -> u64 {
    n - (sparsity * n as f64).floor() as u64
}

fn check_sparsity(what: &'static str, s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: s,
            min: 0.0,
            max: 1.0,
        })
    }
}

/// Task-specific bits that must sit in SRAM for one task.
fn sram_task_bits(counts: &PartitionedCounts, placement: Placement, vb: u64) -> u64 {
    match placement {
        Placement::AdapterAlbert => counts.task_specific() * vb,
        Placement::VanillaAlbert => counts.norms_and_head() * vb,
    }
}

pub fn footprint(input: &FootprintInput) -> Result<FootprintRequirement> {
    check_sparsity("s_embd", input.s_embd)?;
    check_sparsity("s_tf", input.s_tf)?;
    if !matches!(input.mlc_bits_per_cell, 1 | 2) {
        return Err(Error::field("mlc_bits_per_cell", "must be 1 or 2"));
    }
    if input.tasks.is_empty() {
        return Err(Error::Empty("task list"));
    }

    let vb = input.format.bits() as u64;
    let bpc = input.mlc_bits_per_cell as u64;
    let all: Vec<PartitionedCounts> = input
        .tasks
        .iter()
        .map(|t| count_partition(&input.model, t))
        .collect();
    let shared = all[0];
    let nnz_embd = surviving(shared.backbone_embedding(), input.s_embd);
    let nnz_tf = surviving(shared.backbone_transformer(), input.s_tf);
    let task_bits = all
        .iter()
        .map(|c| sram_task_bits(c, input.placement, vb))
        .max()
        .unwrap_or(0);

    let mut req = match input.placement {
        Placement::AdapterAlbert => FootprintRequirement {
            slc_bits: shared.backbone(),
            mlc_bits: ((nnz_embd + nnz_tf) * vb).div_ceil(bpc),
            sram_bits: task_bits,
        },
        Placement::VanillaAlbert => {
            let mut sram_bits = nnz_tf * vb + task_bits;
            if input.accounting == Accounting::Full {
                sram_bits += shared.backbone_transformer();
            }
            FootprintRequirement {
                slc_bits: shared.backbone_embedding(),
                mlc_bits: (nnz_embd * vb).div_ceil(bpc),
                sram_bits,
            }
        }
    };
    if input.accounting == Accounting::Full {
        req.sram_bits += activation_buffer_bits(&input.model, vb);
    }
    Ok(req)
}

/// Two ping-pong buffers of the widest activation at the longest sequence.
pub fn activation_buffer_bits(model: &ModelSpec, value_bits: u64) -> u64 {
    model.max_seq_len * model.hidden_dim.max(model.ffn_dim) * value_bits * 2
}
