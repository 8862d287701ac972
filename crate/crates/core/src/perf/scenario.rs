use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::compression::ValueFormat;
use crate::error::{Error, Result};
use crate::memory::{footprint, Accounting, FootprintInput, FootprintRequirement, Placement};
use crate::model::{ModelSpec, TaskSpec};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

fn default_mlc_bits_per_cell() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatapathSpec {
    pub mac_units: u64,
    pub clock_ghz: f64,
}

impl Default for DatapathSpec {
    fn default() -> Self {
        Self {
            mac_units: 256,
            clock_ghz: 1.0,
        }
    }
}

impl DatapathSpec {
    pub fn validate(&self) -> Result<()> {
        if self.mac_units == 0 {
            return Err(Error::field("datapath.mac_units", "must be positive"));
        }
        if !(self.clock_ghz.is_finite() && self.clock_ghz > 0.0) {
            return Err(Error::field("datapath.clock_ghz", "must be positive"));
        }
        Ok(())
    }

    pub fn macs_per_ns(&self) -> f64 {
        self.mac_units as f64 * self.clock_ghz
    }
}

/// A run of consecutive inferences of one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Visit {
    pub task_id: String,
    pub inferences: u64,
}

/// A multi-task workload on one provisioned design. The schedule repeats
/// cyclically, so the first visit follows the last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub model: ModelSpec,
    pub tasks: Vec<TaskSpec>,
    pub schedule: Vec<Visit>,
    pub seq_len: u64,
    pub format: ValueFormat,
    pub s_embd: f64,
    pub s_tf: f64,
    pub placement: Placement,
    #[serde(default = "default_mlc_bits_per_cell")]
    pub mlc_bits_per_cell: u32,
    #[serde(default)]
    pub datapath: DatapathSpec,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: ScenarioConfig = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::field(
                "schema_version",
                format!(
                    "expected {SCENARIO_SCHEMA_VERSION}, found {}",
                    self.schema_version
                ),
            ));
        }
        self.model.validate()?;
        self.datapath.validate()?;
        if self.tasks.is_empty() {
            return Err(Error::field("tasks", "must list at least one task"));
        }
        let mut ids = HashSet::new();
        for t in &self.tasks {
            t.validate()?;
            if !ids.insert(t.task_id.as_str()) {
                return Err(Error::field(
                    "tasks",
                    format!("duplicate task_id `{}`", t.task_id),
                ));
            }
        }
        if self.schedule.is_empty() {
            return Err(Error::field("schedule", "must contain at least one visit"));
        }
        for (i, v) in self.schedule.iter().enumerate() {
            if !ids.contains(v.task_id.as_str()) {
                return Err(Error::field(
                    format!("schedule[{i}].task_id"),
                    format!("`{}` is not in tasks", v.task_id),
                ));
            }
            if v.inferences == 0 {
                return Err(Error::field(
                    format!("schedule[{i}].inferences"),
                    "must be positive",
                ));
            }
        }
        if self.seq_len == 0 || self.seq_len > self.model.max_seq_len {
            return Err(Error::field(
                "seq_len",
                format!("must lie in 1..={}", self.model.max_seq_len),
            ));
        }
        for (name, s) in [("s_embd", self.s_embd), ("s_tf", self.s_tf)] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::field(name, format!("{s} is outside [0, 1]")));
            }
        }
        if !matches!(self.mlc_bits_per_cell, 1 | 2) {
            return Err(Error::field("mlc_bits_per_cell", "must be 1 or 2"));
        }
        Ok(())
    }

    pub fn task(&self, id: &str) -> Result<&TaskSpec> {
        self.tasks
            .iter()
            .find(|t| t.task_id == id)
            .ok_or_else(|| Error::UnknownTask(id.to_string()))
    }

    pub fn total_inferences(&self) -> u64 {
        self.schedule.iter().map(|v| v.inferences).sum()
    }

    /// Capacity the design is provisioned for: full accounting over every
    /// task of the scenario.
    pub fn requirement(&self) -> Result<FootprintRequirement> {
        footprint(&FootprintInput {
            model: self.model,
            tasks: self.tasks.clone(),
            s_embd: self.s_embd,
            s_tf: self.s_tf,
            format: self.format,
            placement: self.placement,
            accounting: Accounting::Full,
            mlc_bits_per_cell: self.mlc_bits_per_cell,
        })
    }
}
