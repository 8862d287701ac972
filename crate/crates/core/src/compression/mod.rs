//! Backbone compression: magnitude pruning, cumulative-sparsity bookkeeping,
//! critical-sparsity-point search, bitmask sparse encoding, fixed-point
//! quantization and single-bit fault injection.

mod bitmask;
mod fault;
mod prune;
mod quant;
mod sparsity;
mod tensor;

pub use bitmask::{
    bitmask_decode, bitmask_encode, read_sparse, write_sparse, DeficitPolicy, SparseTensor,
    SPARSE_HEADER_BYTES,
};
pub use fault::{inject_fault, FaultTarget, InjectedFault};
pub use prune::prune_magnitude;
pub use quant::{quantize, quantize_value, FixedPointFormat, ValueFormat};
pub use sparsity::{cumulative_sparsity, find_csp_1d, find_csp_2d, CspOutcome, SparsityPoint};
pub use tensor::Tensor2D;
