//! Helpers for the acceptance harness in `tests/acceptance.rs`.

use std::env;
use std::io;
use std::path::PathBuf;
use std::process::Command;

/// Result of one criterion: a detail line either way.
pub type Outcome = Result<String, String>;

/// Relative comparison against a reference value.
pub fn within(what: &str, got: f64, want: f64, tol: f64) -> Outcome {
    let rel = (got - want) / want;
    let line = format!("{what} {got:.4} vs {want} ({:+.2}%)", rel * 100.0);
    if rel.abs() <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Collects every check so one failure does not hide the others.
#[derive(Debug, Default)]
pub struct Checks {
    passed: Vec<String>,
    failed: Vec<String>,
}

impl Checks {
    pub fn add(&mut self, r: Outcome) {
        match r {
            Ok(s) => self.passed.push(s),
            Err(s) => self.failed.push(s),
        }
    }

    pub fn require(&mut self, ok: bool, msg: impl Into<String>) {
        self.add(if ok { Ok(msg.into()) } else { Err(msg.into()) });
    }

    pub fn finish(self) -> Outcome {
        if self.failed.is_empty() {
            Ok(format!("{} checks", self.passed.len()))
        } else {
            Err(format!("failed: {}", self.failed.join("; ")))
        }
    }
}

/// Path of the `hmsim` executable for the running test profile.
///
/// `HMSIM_BIN` overrides the lookup. Otherwise the binary is expected next
/// to the test's `deps` directory and is built with cargo when missing.
pub fn hmsim_binary() -> io::Result<PathBuf> {
    if let Some(p) = env::var_os("HMSIM_BIN") {
        return Ok(p.into());
    }
    let exe = env::current_exe()?;
    let profile_dir = exe
        .parent()
        .and_then(|deps| deps.parent())
        .ok_or_else(|| io::Error::other("test executable has no profile directory"))?;
    let bin = profile_dir.join(format!("hmsim{}", env::consts::EXE_SUFFIX));
    if bin.exists() {
        return Ok(bin);
    }
    let profile = match profile_dir.file_name().and_then(|n| n.to_str()) {
        Some("debug") | None => "dev",
        Some(other) => other,
    };
    let status = Command::new(env::var_os("CARGO").unwrap_or_else(|| "cargo".into()))
        .args([
            "build",
            "--quiet",
            "-p",
            "hmsim",
            "--bin",
            "hmsim",
            "--profile",
            profile,
        ])
        .status()?;
    if !status.success() || !bin.exists() {
        return Err(io::Error::other(format!(
            "could not build {}",
            bin.display()
        )));
    }
    Ok(bin)
}
