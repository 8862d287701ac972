//! `hmsim` command-line front end.
//!
//! Each subcommand loads its inputs, calls into `hmsim-core` and prints a
//! JSON (or CSV / table) result on stdout. Errors map to exit codes: 2 for
//! usage, 3 for invalid input, 4 for internal invariant violations.

pub mod cmd;
pub mod error;
pub mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use hmsim_core::compression::{FaultTarget, ValueFormat};
use hmsim_core::memory::{Accounting, Placement};
use hmsim_core::model::VaseMode;

pub use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "hmsim",
    version,
    about = "Heterogeneous-memory multi-task inference simulator"
)]
pub struct Cli {
    /// Scenario JSON. Repeat for `sweep`.
    #[arg(long, global = true)]
    pub scenario: Vec<PathBuf>,
    /// Technology profile JSON; the bundled profile when omitted.
    #[arg(long, global = true, env = "HMSIM_PROFILE")]
    pub profile: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Stdout format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_accounting(s: &str) -> Result<Accounting, String> {
    match s {
        "paper-parity" | "parity" => Ok(Accounting::PaperParity),
        "full" => Ok(Accounting::Full),
        other => Err(format!("unknown accounting `{other}` (paper-parity, full)")),
    }
}

fn parse_target(s: &str) -> Result<FaultTarget, String> {
    match s {
        "bitmask" => Ok(FaultTarget::Bitmask),
        "values" => Ok(FaultTarget::Values),
        other => Err(format!("unknown target `{other}` (bitmask, values)")),
    }
}

fn parse_vase_mode(s: &str) -> Result<VaseMode, String> {
    match s {
        "smallest-meeting" => Ok(VaseMode::SmallestMeeting),
        "argmax" => Ok(VaseMode::Argmax),
        other => Err(format!("unknown mode `{other}` (smallest-meeting, argmax)")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-technology capacity for both placements and all studied formats.
    Footprint {
        #[arg(long)]
        placement: Option<Placement>,
        #[arg(long)]
        fmt: Option<ValueFormat>,
        #[arg(long, value_parser = parse_accounting, default_value = "paper-parity")]
        accounting: Accounting,
        #[arg(long)]
        s_embd: Option<f64>,
        #[arg(long)]
        s_tf: Option<f64>,
    },
    /// Cost report for one scenario, optionally normalized to a baseline.
    Simulate {
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Critical sparsity point of an accuracy grid (columns s_embd,s_tf,accuracy).
    Csp {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        baseline: f64,
    },
    /// Adapter size selection from an accuracy grid (columns adapter_size,accuracy).
    Vase {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        baseline: f64,
        #[arg(long, value_parser = parse_vase_mode, default_value = "smallest-meeting")]
        mode: VaseMode,
    },
    /// Dense tensor JSON to bitmask binary file.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "fp32")]
        fmt: ValueFormat,
    },
    /// Bitmask binary file to dense tensor JSON.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "fp32")]
        fmt: ValueFormat,
    },
    /// Round a dense tensor onto a fixed-point grid.
    Quantize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        fmt: ValueFormat,
    },
    /// Flip one bit of a bitmask binary file.
    Inject {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = parse_target)]
        target: FaultTarget,
        /// Bit to flip; drawn from `--seed` when omitted.
        #[arg(long)]
        position: Option<usize>,
        #[arg(long, default_value = "fp32")]
        fmt: ValueFormat,
    },
    /// Simulate every scenario x format x inferences-per-visit combination
    /// in parallel.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        fmts: Vec<ValueFormat>,
        #[arg(long, value_delimiter = ',')]
        inferences: Vec<u64>,
    },
}

/// Runs a parsed command and returns what it prints on stdout.
pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Footprint {
            placement,
            fmt,
            accounting,
            s_embd,
            s_tf,
        } => cmd::footprint::run(
            cli,
            &cmd::footprint::Filter {
                placement: *placement,
                fmt: *fmt,
                accounting: *accounting,
                s_embd: *s_embd,
                s_tf: *s_tf,
            },
        ),
        Command::Simulate { baseline } => cmd::simulate::run(cli, baseline.as_deref()),
        Command::Csp { grid, baseline } => cmd::csp::run(cli, grid, *baseline),
        Command::Vase {
            grid,
            baseline,
            mode,
        } => cmd::vase::run(grid, *baseline, *mode),
        Command::Encode { input, output, fmt } => cmd::tensor::encode(input, output, *fmt),
        Command::Decode { input, output, fmt } => cmd::tensor::decode(input, output, *fmt),
        Command::Quantize { input, output, fmt } => cmd::tensor::quantize(input, output, *fmt),
        Command::Inject {
            input,
            output,
            target,
            position,
            fmt,
        } => cmd::tensor::inject(input, output.as_deref(), *target, *position, *fmt, cli.seed),
        Command::Sweep { fmts, inferences } => cmd::sweep::run(cli, fmts, inferences),
    }
}

impl Cli {
    pub fn single_scenario(&self) -> CliResult<Option<&std::path::Path>> {
        match self.scenario.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(one)),
            _ => Err(CliError::Usage(
                "this command takes a single --scenario".into(),
            )),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("hmsim-out"))
    }
}
