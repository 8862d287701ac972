//! Dimensional description of a shared-layer transformer with residual
//! adapters, and closed-form parameter accounting split into the backbone
//! (shared by every task) and the task-specific partition.
//!
//! Accounting conventions:
//! - every matrix carries a bias vector;
//! - the backbone holds the factorized embeddings (word, position, token type,
//!   embedding-to-hidden projection), the attention and feed-forward weights of
//!   the single shared layer, and the pooler;
//! - the task-specific partition holds both adapter slots, every layer-norm
//!   scale/offset pair and the classifier head.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adapter bottleneck sizes accepted by default.
pub const DEFAULT_ADAPTER_SIZES: [u64; 3] = [32, 64, 128];

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub vocab_size: u64,
    /// Width of the factorized embedding table.
    pub embed_dim: u64,
    pub hidden_dim: u64,
    pub ffn_dim: u64,
    /// Number of executions of the single shared layer.
    pub num_layers: u64,
    pub num_heads: u64,
    /// Longest sequence the deployment must buffer activations for.
    pub max_seq_len: u64,
    pub max_position_embeddings: u64,
    pub token_type_count: u64,
    #[serde(default = "default_true")]
    pub share_adapters_across_layers: bool,
    #[serde(default = "default_true")]
    pub include_pooler: bool,
}

impl Default for ModelSpec {
    /// ALBERT-base, deployed with 128-token sequences.
    fn default() -> Self {
        Self {
            vocab_size: 30_000,
            embed_dim: 128,
            hidden_dim: 768,
            ffn_dim: 3072,
            num_layers: 12,
            num_heads: 12,
            max_seq_len: 128,
            max_position_embeddings: 512,
            token_type_count: 2,
            share_adapters_across_layers: true,
            include_pooler: true,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("vocab_size", self.vocab_size),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("ffn_dim", self.ffn_dim),
            ("num_layers", self.num_layers),
            ("num_heads", self.num_heads),
            ("max_seq_len", self.max_seq_len),
            ("max_position_embeddings", self.max_position_embeddings),
            ("token_type_count", self.token_type_count),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::field(format!("model.{name}"), "must be positive"));
            }
        }
        if !self.hidden_dim.is_multiple_of(self.num_heads) {
            return Err(Error::field(
                "model.hidden_dim",
                format!(
                    "{} is not divisible by num_heads = {}",
                    self.hidden_dim, self.num_heads
                ),
            ));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> u64 {
        self.hidden_dim / self.num_heads
    }
}

/// Set of bottleneck sizes a task may pick for each adapter slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub allowed_sizes: Vec<u64>,
}

impl Default for AdapterConfig {
    fn default() -> Self {
        Self {
            allowed_sizes: DEFAULT_ADAPTER_SIZES.to_vec(),
        }
    }
}

impl AdapterConfig {
    pub fn check(&self, task: &TaskSpec) -> Result<()> {
        for (slot, size) in task.adapter_sizes.iter().enumerate() {
            if !self.allowed_sizes.contains(size) {
                return Err(Error::field(
                    format!("tasks[{}].adapter_sizes[{slot}]", task.task_id),
                    format!("{size} is not one of {:?}", self.allowed_sizes),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub task_id: String,
    pub num_labels: u64,
    /// Bottleneck sizes of the post-attention and post-feed-forward adapters.
    pub adapter_sizes: [u64; 2],
}

impl TaskSpec {
    pub fn new(task_id: impl Into<String>, num_labels: u64, adapter_sizes: [u64; 2]) -> Self {
        Self {
            task_id: task_id.into(),
            num_labels,
            adapter_sizes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.task_id.is_empty() {
            return Err(Error::field("tasks[].task_id", "must not be empty"));
        }
        if self.num_labels == 0 {
            return Err(Error::field(
                format!("tasks[{}].num_labels", self.task_id),
                "must be at least 1",
            ));
        }
        Ok(())
    }

    /// The same task with both adapters removed.
    pub fn without_adapters(&self) -> Self {
        Self {
            adapter_sizes: [0, 0],
            ..self.clone()
        }
    }
}

/// Itemized parameter counts for one (model, task) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PartitionedCounts {
    pub word_embeddings: u64,
    pub position_embeddings: u64,
    pub token_type_embeddings: u64,
    pub embedding_projection: u64,
    pub attention: u64,
    pub feed_forward: u64,
    pub pooler: u64,
    pub adapters: u64,
    pub layer_norms: u64,
    pub classifier: u64,
}

impl PartitionedCounts {
    pub fn backbone_embedding(&self) -> u64 {
        self.word_embeddings
            + self.position_embeddings
            + self.token_type_embeddings
            + self.embedding_projection
    }

    /// Attention and feed-forward weights of the shared layer (one copy).
    pub fn shared_layer(&self) -> u64 {
        self.attention + self.feed_forward
    }

    pub fn backbone_transformer(&self) -> u64 {
        self.shared_layer() + self.pooler
    }

    pub fn backbone(&self) -> u64 {
        self.backbone_embedding() + self.backbone_transformer()
    }

    pub fn task_specific(&self) -> u64 {
        self.adapters + self.layer_norms + self.classifier
    }

    /// Task-specific parameters other than adapters.
    pub fn norms_and_head(&self) -> u64 {
        self.layer_norms + self.classifier
    }

    pub fn total(&self) -> u64 {
        self.backbone() + self.task_specific()
    }

    fn fraction(&self, part: u64) -> f64 {
        match self.total() {
            0 => 0.0,
            total => part as f64 / total as f64,
        }
    }

    /// Share of the whole model held by the embedding backbone.
    pub fn p_embd(&self) -> f64 {
        self.fraction(self.backbone_embedding())
    }

    /// Share of the whole model held by the transformer backbone.
    pub fn p_tf(&self) -> f64 {
        self.fraction(self.backbone_transformer())
    }

    pub fn p_task(&self) -> f64 {
        self.fraction(self.task_specific())
    }
}

fn adapter_slot(hidden: u64, size: u64) -> u64 {
    if size == 0 {
        return 0;
    }
    // down-projection + bias, up-projection + bias
    (hidden * size + size) + (size * hidden + hidden)
}

/// Closed-form parameter count of `spec` specialised for `task`.
pub fn count_partition(spec: &ModelSpec, task: &TaskSpec) -> PartitionedCounts {
    let e = spec.embed_dim;
    let h = spec.hidden_dim;
    let f = spec.ffn_dim;

    let adapter_copies = if spec.share_adapters_across_layers {
        1
    } else {
        spec.num_layers
    };
    let adapters = task
        .adapter_sizes
        .iter()
        .map(|&s| adapter_slot(h, s))
        .sum::<u64>()
        * adapter_copies;

    PartitionedCounts {
        word_embeddings: spec.vocab_size * e,
        position_embeddings: spec.max_position_embeddings * e,
        token_type_embeddings: spec.token_type_count * e,
        embedding_projection: e * h + h,
        attention: 4 * (h * h + h),
        feed_forward: (h * f + f) + (f * h + h),
        pooler: if spec.include_pooler { h * h + h } else { 0 },
        adapters,
        // embedding norm + post-attention norm + post-feed-forward norm
        layer_norms: 2 * e + 2 * (2 * h),
        classifier: h * task.num_labels + task.num_labels,
    }
}

/// Relative growth of `adapter_counts` over a model of `base_total`
/// parameters.
pub fn param_overhead(adapter_counts: &PartitionedCounts, base_total: u64) -> Result<f64> {
    if base_total == 0 {
        return Err(Error::Zero("base parameter total"));
    }
    Ok((adapter_counts.total() as f64 - base_total as f64) / base_total as f64)
}

/// The task with the largest task-specific partition. Ties go to the
/// lexicographically smallest `task_id`.
pub fn worst_case_task<'a>(spec: &ModelSpec, tasks: &'a [TaskSpec]) -> Result<&'a TaskSpec> {
    tasks
        .iter()
        .map(|t| (count_partition(spec, t).task_specific(), t))
        .max_by(|(a, ta), (b, tb)| a.cmp(b).then_with(|| tb.task_id.cmp(&ta.task_id)))
        .map(|(_, t)| t)
        .ok_or(Error::Empty("task list"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VaseMode {
    /// Smallest adapter that meets the baseline, else the most accurate one.
    SmallestMeeting,
    Argmax,
}

fn argmax_size(grid: &[(u64, f64)]) -> u64 {
    grid.iter()
        .copied()
        .max_by(|(sa, a), (sb, b)| a.total_cmp(b).then_with(|| sb.cmp(sa)))
        .map(|(s, _)| s)
        .expect("grid checked non-empty")
}

/// Variable adapter size selection over a measured accuracy grid.
pub fn vase_select(grid: &[(u64, f64)], baseline: f64, mode: VaseMode) -> Result<u64> {
    if grid.is_empty() {
        return Err(Error::Empty("accuracy grid"));
    }
    Ok(match mode {
        VaseMode::Argmax => argmax_size(grid),
        VaseMode::SmallestMeeting => grid
            .iter()
            .filter(|(_, acc)| *acc >= baseline)
            .map(|(s, _)| *s)
            .min()
            .unwrap_or_else(|| argmax_size(grid)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(s: u64) -> TaskSpec {
        TaskSpec::new(format!("t{s}"), 2, [s, s])
    }

    #[test]
    fn albert_base_itemized() {
        let c = count_partition(&ModelSpec::default(), &task(64));
        assert_eq!(c.backbone_embedding(), 3_840_000 + 65_536 + 256 + 99_072);
        assert_eq!(c.attention, 2_362_368);
        assert_eq!(c.feed_forward, 4_722_432);
        assert_eq!(c.pooler, 590_592);
        assert_eq!(c.adapters, 2 * 99_136);
        assert_eq!(c.layer_norms, 3_328);
        assert_eq!(c.classifier, 1_538);
        assert_eq!(c.total(), 11_883_394);
    }

    #[test]
    fn empty_task_partition_is_zero() {
        let spec = ModelSpec {
            embed_dim: 0,
            hidden_dim: 0,
            ..ModelSpec::default()
        };
        let c = count_partition(&spec, &TaskSpec::new("z", 0, [0, 0]));
        assert_eq!(c.task_specific(), 0);
    }

    #[test]
    fn per_layer_adapters_scale_with_depth() {
        let mut spec = ModelSpec::default();
        let shared = count_partition(&spec, &task(64)).adapters;
        spec.share_adapters_across_layers = false;
        assert_eq!(count_partition(&spec, &task(64)).adapters, 12 * shared);
    }

    #[test]
    fn overhead_formula() {
        let c = PartitionedCounts {
            word_embeddings: 11_880_000,
            ..Default::default()
        };
        let o = param_overhead(&c, 11_600_000).unwrap();
        assert!((o - 0.024).abs() < 5e-4, "{o}");
        assert_eq!(param_overhead(&c, c.total()).unwrap(), 0.0);
        let c = PartitionedCounts {
            word_embeddings: 12_060_000,
            ..Default::default()
        };
        let o = param_overhead(&c, 11_600_000).unwrap();
        assert!((o - 0.039).abs() < 1e-3, "{o}");
        assert!(param_overhead(&c, 0).is_err());
    }

    #[test]
    fn worst_case_brute_force() {
        let spec = ModelSpec::default();
        let tasks = vec![task(32), task(128), task(64)];
        let best = tasks
            .iter()
            .max_by_key(|t| count_partition(&spec, t).task_specific())
            .unwrap();
        assert_eq!(worst_case_task(&spec, &tasks).unwrap(), best);
        assert_eq!(best.adapter_sizes, [128, 128]);
    }

    #[test]
    fn worst_case_edges() {
        let spec = ModelSpec::default();
        assert!(worst_case_task(&spec, &[]).is_err());
        let one = [task(32)];
        assert_eq!(worst_case_task(&spec, &one).unwrap().task_id, "t32");
        let twins = [
            TaskSpec::new("b", 2, [64, 64]),
            TaskSpec::new("a", 2, [64, 64]),
        ];
        assert_eq!(worst_case_task(&spec, &twins).unwrap().task_id, "a");
    }

    #[test]
    fn vase_rules() {
        let grid = [(32, 88.0), (64, 90.2), (128, 90.5)];
        assert_eq!(
            vase_select(&grid, 90.0, VaseMode::SmallestMeeting).unwrap(),
            64
        );
        assert_eq!(
            vase_select(&grid, 80.0, VaseMode::SmallestMeeting).unwrap(),
            32
        );
        assert_eq!(vase_select(&grid, 90.0, VaseMode::Argmax).unwrap(), 128);
        let none = [(32, 80.0), (64, 85.0), (128, 84.0)];
        assert_eq!(
            vase_select(&none, 90.0, VaseMode::SmallestMeeting).unwrap(),
            64
        );
        let tie = [(128, 85.0), (64, 85.0)];
        assert_eq!(vase_select(&tie, 90.0, VaseMode::Argmax).unwrap(), 64);
        assert!(vase_select(&[], 90.0, VaseMode::Argmax).is_err());
    }

    #[test]
    fn validation() {
        assert!(ModelSpec::default().validate().is_ok());
        let bad = ModelSpec {
            num_heads: 7,
            ..ModelSpec::default()
        };
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("model.hidden_dim"), "{err}");
        assert!(TaskSpec::new("x", 0, [32, 32]).validate().is_err());
        let cfg = AdapterConfig::default();
        assert!(cfg.check(&task(64)).is_ok());
        assert!(cfg.check(&task(48)).is_err());
    }
}
