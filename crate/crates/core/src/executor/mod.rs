//! Small-scale numerical execution of one adapter-augmented transformer
//! block, used to check that pruning, bitmask encoding and fixed-point
//! arithmetic behave as expected end to end.

mod block;
mod check;
mod weights;

pub use block::{
    adapter_forward, attention, block_forward, layer_norm, linear, Activation, BlockConfig,
    NormOrder,
};
pub use check::{sparse_equivalence_check, EquivalenceOptions, EquivalenceReport};
pub use weights::{AdapterWeights, BlockWeights, LayerNormParams, Linear};
