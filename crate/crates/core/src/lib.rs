//! Simulator and compression toolchain for multi-task transformer inference
//! on an edge accelerator whose scratchpad mixes SRAM with single- and
//! multi-level-cell RRAM.
//!
//! The crate is organised bottom-up:
//! - [`model`]: parameter accounting for the adapter-augmented shared-layer
//!   transformer, split into backbone and task-specific partitions;
//! - [`compression`]: pruning, bitmask encoding, fixed-point quantization and
//!   fault injection;
//! - [`memory`]: memory footprints, technology profiles and macro provisioning;
//! - [`perf`]: per-inference energy/latency and area under task switching;
//! - [`executor`]: a small numerical transformer block used to check that the
//!   compression pipeline preserves results.

pub mod compression;
pub mod data;
pub mod error;
pub mod executor;
pub mod memory;
pub mod model;
pub mod perf;

pub use error::{Error, Result};

/// Bytes in one reported megabyte.
pub const MIB: f64 = 1_048_576.0;
