pub mod csp;
pub mod footprint;
pub mod simulate;
pub mod sweep;
pub mod tensor;
pub mod vase;

/// Version written into every output that carries one.
pub const SCHEMA_VERSION: u32 = 1;
