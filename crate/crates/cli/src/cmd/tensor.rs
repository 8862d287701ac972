//! File-level wrappers around the sparse codec, quantizer and fault injector.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use hmsim_core::compression::{
    bitmask_decode, bitmask_encode, inject_fault, quantize as quantize_tensor, read_sparse,
    write_sparse, DeficitPolicy, FaultTarget, ValueFormat,
};

use super::SCHEMA_VERSION;
use crate::error::{CliError, CliResult};
use crate::io::{read_bytes, read_dense, sha256_hex, to_json, write_bytes, write_dense};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorOutput {
    pub schema_version: u32,
    pub operation: String,
    pub format: ValueFormat,
    pub rows: usize,
    pub cols: usize,
    pub nonzeros: usize,
    pub output: PathBuf,
    pub output_bytes: usize,
    pub output_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectOutput {
    pub schema_version: u32,
    pub target: FaultTarget,
    pub position: usize,
    pub format: ValueFormat,
    /// Decoded elements that changed.
    pub corruption: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn summary(
    op: &str,
    fmt: ValueFormat,
    rows: usize,
    cols: usize,
    nonzeros: usize,
    output: &Path,
) -> CliResult<String> {
    let bytes = read_bytes(output)?;
    Ok(to_json(&TensorOutput {
        schema_version: SCHEMA_VERSION,
        operation: op.into(),
        format: fmt,
        rows,
        cols,
        nonzeros,
        output: output.to_path_buf(),
        output_bytes: bytes.len(),
        output_sha256: sha256_hex(&[&bytes]),
    }))
}

pub fn encode(input: &Path, output: &Path, fmt: ValueFormat) -> CliResult<String> {
    let t = read_dense(input)?;
    let s = bitmask_encode(&t);
    write_bytes(output, &write_sparse(&s, fmt)?)?;
    summary("encode", fmt, t.rows(), t.cols(), s.popcount(), output)
}

fn load_sparse(input: &Path, fmt: ValueFormat) -> CliResult<hmsim_core::compression::SparseTensor> {
    read_sparse(&read_bytes(input)?, fmt)
        .map_err(|e| CliError::Schema(format!("{}: {e}", input.display())))
}

pub fn decode(input: &Path, output: &Path, fmt: ValueFormat) -> CliResult<String> {
    let s = load_sparse(input, fmt)?;
    let t = bitmask_decode(&s, DeficitPolicy::Error)?;
    write_dense(output, &t)?;
    summary("decode", fmt, t.rows(), t.cols(), s.popcount(), output)
}

pub fn quantize(input: &Path, output: &Path, fmt: ValueFormat) -> CliResult<String> {
    let t = quantize_tensor(&read_dense(input)?, fmt);
    write_dense(output, &t)?;
    summary(
        "quantize",
        fmt,
        t.rows(),
        t.cols(),
        t.count_nonzero(),
        output,
    )
}

pub fn inject(
    input: &Path,
    output: Option<&Path>,
    target: FaultTarget,
    position: Option<usize>,
    fmt: ValueFormat,
    seed: u64,
) -> CliResult<String> {
    let s = load_sparse(input, fmt)?;
    let span = match target {
        FaultTarget::Bitmask => s.len(),
        FaultTarget::Values => s.values().len() * fmt.bits() as usize,
    };
    let position = match position {
        Some(p) => p,
        None if span == 0 => {
            return Err(CliError::Usage(
                "tensor has no bits to flip for this target".into(),
            ))
        }
        None => ChaCha8Rng::seed_from_u64(seed).gen_range(0..span),
    };
    let hit =
        inject_fault(&s, target, position, fmt).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(out) = output {
        write_bytes(out, &write_sparse(&hit.tensor, fmt)?)?;
    }
    Ok(to_json(&InjectOutput {
        schema_version: SCHEMA_VERSION,
        target,
        position,
        format: fmt,
        corruption: hit.corruption,
        output: output.map(Path::to_path_buf),
    }))
}
