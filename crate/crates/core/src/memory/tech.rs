use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryKind {
    Sram,
    SlcRram,
    MlcRram,
    Dram,
}

impl MemoryKind {
    pub const ON_CHIP: [MemoryKind; 3] =
        [MemoryKind::Sram, MemoryKind::SlcRram, MemoryKind::MlcRram];

    pub fn name(&self) -> &'static str {
        match self {
            MemoryKind::Sram => "sram",
            MemoryKind::SlcRram => "slc-rram",
            MemoryKind::MlcRram => "mlc-rram",
            MemoryKind::Dram => "dram",
        }
    }

    pub fn is_volatile(&self) -> bool {
        matches!(self, MemoryKind::Sram | MemoryKind::Dram)
    }
}

impl fmt::Display for MemoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One macro the technology library can instantiate. Bandwidth in GB/s is
/// numerically bytes per nanosecond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroSpec {
    pub capacity_bytes: u64,
    pub bandwidth_gb_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryTechProfile {
    pub kind: MemoryKind,
    pub bits_per_cell: u32,
    pub read_energy_pj_per_bit: f64,
    pub write_energy_pj_per_bit: f64,
    pub read_latency_ns: f64,
    pub write_latency_ns: f64,
    /// Static power per byte of provisioned capacity.
    pub leakage_nw_per_byte: f64,
    /// Silicon area per MiB of cell capacity.
    pub area_mm2_per_mb: f64,
    pub macro_catalog: Vec<MacroSpec>,
}

impl MemoryTechProfile {
    pub fn validate(&self) -> Result<()> {
        let at = |f: &str| format!("technologies[{}].{f}", self.kind);
        let costs = [
            ("read_energy_pj_per_bit", self.read_energy_pj_per_bit),
            ("write_energy_pj_per_bit", self.write_energy_pj_per_bit),
            ("read_latency_ns", self.read_latency_ns),
            ("write_latency_ns", self.write_latency_ns),
            ("leakage_nw_per_byte", self.leakage_nw_per_byte),
            ("area_mm2_per_mb", self.area_mm2_per_mb),
        ];
        for (name, v) in costs {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::field(
                    at(name),
                    format!("{v} must be a finite non-negative number"),
                ));
            }
        }
        if !matches!(self.bits_per_cell, 1 | 2) {
            return Err(Error::field(at("bits_per_cell"), "must be 1 or 2"));
        }
        if !self.kind.is_volatile() && self.leakage_nw_per_byte != 0.0 {
            return Err(Error::field(
                at("leakage_nw_per_byte"),
                "non-volatile memories do not leak",
            ));
        }
        if self.macro_catalog.is_empty() {
            return Err(Error::field(
                at("macro_catalog"),
                "must list at least one macro",
            ));
        }
        for (i, m) in self.macro_catalog.iter().enumerate() {
            if m.capacity_bytes == 0 {
                return Err(Error::field(
                    at(&format!("macro_catalog[{i}].capacity_bytes")),
                    "must be positive",
                ));
            }
            if !(m.bandwidth_gb_per_s.is_finite() && m.bandwidth_gb_per_s > 0.0) {
                return Err(Error::field(
                    at(&format!("macro_catalog[{i}].bandwidth_gb_per_s")),
                    "must be positive",
                ));
            }
        }
        Ok(())
    }
}

/// The full set of technology profiles a simulation runs against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechLibrary {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub technologies: Vec<MemoryTechProfile>,
}

impl TechLibrary {
    pub fn from_json(text: &str) -> Result<Self> {
        let lib: TechLibrary = serde_json::from_str(text)?;
        lib.validate()?;
        Ok(lib)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.technologies {
            t.validate()?;
        }
        for kind in MemoryKind::ON_CHIP.into_iter().chain([MemoryKind::Dram]) {
            match self.technologies.iter().filter(|t| t.kind == kind).count() {
                1 => {}
                0 => {
                    return Err(Error::field(
                        "technologies",
                        format!("missing `{kind}` profile"),
                    ))
                }
                _ => {
                    return Err(Error::field(
                        "technologies",
                        format!("duplicate `{kind}` profile"),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, kind: MemoryKind) -> Result<&MemoryTechProfile> {
        self.technologies
            .iter()
            .find(|t| t.kind == kind)
            .ok_or(Error::Unprovisioned(kind.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_profile_is_valid() {
        let lib = TechLibrary::from_json(crate::data::DEFAULT_PROFILE_JSON).unwrap();
        assert_eq!(lib.get(MemoryKind::MlcRram).unwrap().bits_per_cell, 2);
        assert_eq!(
            lib.get(MemoryKind::SlcRram).unwrap().leakage_nw_per_byte,
            0.0
        );
    }

    #[test]
    fn rejects_leaky_rram() {
        let mut lib = TechLibrary::from_json(crate::data::DEFAULT_PROFILE_JSON).unwrap();
        let slc = lib
            .technologies
            .iter_mut()
            .find(|t| t.kind == MemoryKind::SlcRram)
            .unwrap();
        slc.leakage_nw_per_byte = 0.1;
        let err = lib.validate().unwrap_err().to_string();
        assert!(err.contains("slc-rram"), "{err}");
    }

    #[test]
    fn rejects_missing_kind_and_bad_cells() {
        let mut lib = TechLibrary::from_json(crate::data::DEFAULT_PROFILE_JSON).unwrap();
        lib.technologies[0].bits_per_cell = 3;
        assert!(lib.validate().is_err());
        lib.technologies.remove(0);
        assert!(lib.validate().is_err());
    }
}
