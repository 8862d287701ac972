//! On-chip memory: capacity requirements per technology, technology cost
//! profiles, macro provisioning and access costs.

mod footprint;
mod provision;
mod tech;

pub use footprint::{
    activation_buffer_bits, footprint, surviving, Accounting, FootprintInput, FootprintRequirement,
    Placement,
};
pub use provision::{
    access_cost, aggregate_bandwidth, provision, AccessCost, AccessOp, MacroAllocation, MacroPlan,
    MacroPlanEntry, MAX_EXACT_MACROS,
};
pub use tech::{MacroSpec, MemoryKind, MemoryTechProfile, TechLibrary};
