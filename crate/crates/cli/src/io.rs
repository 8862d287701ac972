use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hmsim_core::compression::Tensor2D;
use hmsim_core::data::DEFAULT_PROFILE_JSON;
use hmsim_core::memory::TechLibrary;
use hmsim_core::perf::ScenarioConfig;

use crate::error::{CliError, CliResult};

pub const TENSOR_SCHEMA_VERSION: u32 = 1;

/// A file that was read, with its bytes kept for digests.
pub struct Loaded<T> {
    pub value: T,
    pub path: Option<PathBuf>,
    pub text: String,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Parses JSON and reports failures with the path of the offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Schema(format!("{what}: {inner}"))
        } else {
            CliError::Schema(format!("{what}: field `{path}`: {inner}"))
        }
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

pub fn load_scenario(path: &Path) -> CliResult<Loaded<ScenarioConfig>> {
    let text = read_text(path)?;
    let value: ScenarioConfig = parse_json(&text, &path.display().to_string())?;
    value
        .validate()
        .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        value,
        path: Some(path.to_path_buf()),
        text,
    })
}

/// Loads `path`, or the bundled profile when none is given.
pub fn load_profile(path: Option<&Path>) -> CliResult<Loaded<TechLibrary>> {
    let (text, name) = match path {
        Some(p) => (read_text(p)?, p.display().to_string()),
        None => (
            DEFAULT_PROFILE_JSON.to_string(),
            "bundled profile".to_string(),
        ),
    };
    let value: TechLibrary = parse_json(&text, &name)?;
    value
        .validate()
        .map_err(|e| CliError::Schema(format!("{name}: {e}")))?;
    Ok(Loaded {
        value,
        path: path.map(Path::to_path_buf),
        text,
    })
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Dense tensor interchange file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseTensorFile {
    pub schema_version: u32,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl DenseTensorFile {
    pub fn from_tensor(t: &Tensor2D) -> Self {
        Self {
            schema_version: TENSOR_SCHEMA_VERSION,
            rows: t.rows(),
            cols: t.cols(),
            data: t.data().to_vec(),
        }
    }
}

pub fn read_dense(path: &Path) -> CliResult<Tensor2D> {
    let f: DenseTensorFile = parse_json(&read_text(path)?, &path.display().to_string())?;
    if f.schema_version != TENSOR_SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "{}: field `schema_version`: expected {TENSOR_SCHEMA_VERSION}, found {}",
            path.display(),
            f.schema_version
        )));
    }
    Tensor2D::new(f.rows, f.cols, f.data)
        .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

pub fn write_dense(path: &Path, t: &Tensor2D) -> CliResult<()> {
    write_bytes(path, to_json(&DenseTensorFile::from_tensor(t)).as_bytes())
}

/// Reads a CSV with a header row into `T` records, naming the failing line.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?);
    }
    if out.is_empty() {
        return Err(CliError::Schema(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(out)
}

pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}
