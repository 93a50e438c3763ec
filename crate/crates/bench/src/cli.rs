//! Argument definitions. Each subcommand's arguments double as its job
//! config: they are validated up front and serialized into every report.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mesh3d_core::recon_metrics::{ChamferPower, TauMode, DEFAULT_SAMPLES, DEFAULT_TAU};
use mesh3d_core::signing::{SignMethod, DEFAULT_CUTOFF, MIN_RESOLUTION};
use serde::{Serialize, Serializer};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "mesh3d-bench", version, about = "Mesh <-> grid conversion and 3D generation metrics")]
pub struct Cli {
    /// Worker threads (default: logical cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mesh (OBJ) to truncated SDF or occupancy grid (SDFG).
    Convert(ConvertArgs),
    /// Grid (SDFG) to mesh (OBJ) by marching cubes.
    Reconstruct(ReconstructArgs),
    /// Reconstruction metrics: two directories, or round trips of one.
    EvalRecon(EvalReconArgs),
    /// COV / MMD / 1-NNA between generated and reference shapes.
    EvalGen(EvalGenArgs),
    /// Metric spread over random subsets of a dataset.
    Stability(StabilityArgs),
    /// Bradley-Terry scores from pairwise preferences.
    BtFit(BtFitArgs),
    /// Share of reconstruction and compression error in per-item MMD.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignArg {
    /// Label pipeline (flood fill from the domain corners).
    #[value(alias = "flood-fill")]
    Floodfill,
    /// Ray parity along +x.
    #[value(alias = "parity")]
    Naive,
}

impl From<SignArg> for SignMethod {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Floodfill => SignMethod::FloodFill,
            SignArg::Naive => SignMethod::RaycastParity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKindArg {
    Sdf,
    Occupancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TauModeArg {
    Absolute,
    /// One eighth of the voxel size.
    Voxel,
}

/// Chamfer exponent, 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Power(pub ChamferPower);

impl FromStr for Power {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let p: u8 = s.parse().map_err(|_| format!("invalid power {s:?}"))?;
        ChamferPower::try_from(p).map(Power).map_err(|e| e.to_string())
    }
}

impl Serialize for Power {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.0.as_u8())
    }
}

/// Samples per surface: a count, or `auto` to size it from the F-score
/// threshold and the surface area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Samples {
    Fixed(usize),
    Auto,
}

/// `auto` targets a 1% chance that a point has no sample of the other
/// surface within `tau` purely due to sampling.
pub const AUTO_MISS_RATE: f64 = 0.01;

impl Samples {
    pub fn resolve(self, area: f64, tau: f64) -> usize {
        match self {
            Samples::Fixed(n) => n,
            Samples::Auto => mesh3d_core::recon_metrics::samples_for_threshold(area, tau, AUTO_MISS_RATE),
        }
    }
}

impl FromStr for Samples {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Samples::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("samples must be a positive integer or \"auto\", got {s:?}")),
            Ok(n) => Ok(Samples::Fixed(n)),
        }
    }
}

impl fmt::Display for Samples {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Samples::Fixed(n) => write!(f, "{n}"),
            Samples::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for Samples {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Samples::Fixed(n) => s.serialize_u64(*n as u64),
            Samples::Auto => s.serialize_str("auto"),
        }
    }
}

fn check_resolution(n: usize) -> CliResult<()> {
    if n < MIN_RESOLUTION {
        return Err(CliError::validation(format!("resolution {n} is below the minimum of {MIN_RESOLUTION}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(CliError::validation(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvertArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long = "res", default_value_t = 64)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = SignArg::Floodfill)]
    pub sign: SignArg,
    #[arg(long, value_enum, default_value_t = GridKindArg::Sdf)]
    pub kind: GridKindArg,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    /// Use the mesh coordinates as given instead of fitting the unit cube.
    #[arg(long = "no-normalize", action = clap::ArgAction::SetFalse)]
    pub normalize: bool,
}

impl ConvertArgs {
    pub fn validate(&self) -> CliResult<()> {
        check_resolution(self.resolution)?;
        check_positive("cutoff", self.cutoff)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReconstructArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Iso level (default: 0 for SDF grids, 0.5 for occupancy).
    #[arg(long)]
    pub iso: Option<f64>,
}

impl ReconstructArgs {
    pub fn validate(&self) -> CliResult<()> {
        match self.iso {
            Some(v) if !v.is_finite() => Err(CliError::validation(format!("iso must be finite, got {v}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalReconArgs {
    /// `DIR_A DIR_B` (A evaluated against reference B), or one directory
    /// with `--roundtrip`.
    #[arg(required = true, num_args = 1..=2)]
    pub dirs: Vec<PathBuf>,
    /// Convert every mesh to a grid and back, then compare with the original.
    #[arg(long)]
    pub roundtrip: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Grid resolutions for round trips, comma separated.
    #[arg(long = "res", value_delimiter = ',', default_value = "64")]
    pub resolutions: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SignArg::Floodfill)]
    pub sign: SignArg,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = TauModeArg::Absolute)]
    pub tau_mode: TauModeArg,
    #[arg(long, default_value = "1")]
    pub power: Power,
    #[arg(long, default_value_t = Samples::Fixed(DEFAULT_SAMPLES))]
    pub samples: Samples,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fit each mesh to the unit cube first (always on for round trips).
    #[arg(long)]
    pub normalize: bool,
}

impl EvalReconArgs {
    pub fn validate(&self) -> CliResult<()> {
        match (self.roundtrip, self.dirs.len()) {
            (true, 1) | (false, 2) => {}
            (true, _) => return Err(CliError::validation("--roundtrip takes exactly one directory")),
            (false, _) => return Err(CliError::validation("expected two directories (or --roundtrip DIR)")),
        }
        if self.roundtrip {
            if self.resolutions.is_empty() {
                return Err(CliError::validation("no resolution given"));
            }
            for &n in &self.resolutions {
                check_resolution(n)?;
            }
            check_positive("cutoff", self.cutoff)?;
        } else if self.tau_mode == TauModeArg::Voxel {
            return Err(CliError::validation("--tau-mode voxel needs --roundtrip"));
        }
        check_positive("tau", self.tau)
    }

    pub fn tau_mode(&self) -> TauMode {
        match self.tau_mode {
            TauModeArg::Absolute => TauMode::Absolute(self.tau),
            TauModeArg::Voxel => TauMode::VoxelRelative,
        }
    }
}

/// Points per shape for set metrics.
pub const DEFAULT_SET_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalGenArgs {
    pub gen_dir: PathBuf,
    pub ref_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "1")]
    pub power: Power,
    #[arg(long, default_value_t = DEFAULT_SET_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub normalize: bool,
}

impl EvalGenArgs {
    pub fn validate(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(CliError::validation("samples must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StabilityArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200,400")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value = "1")]
    pub power: Power,
    #[arg(long, default_value_t = DEFAULT_SET_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub normalize: bool,
}

impl StabilityArgs {
    pub fn validate(&self) -> CliResult<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(CliError::validation("sizes must be positive"));
        }
        if self.trials == 0 || self.samples == 0 {
            return Err(CliError::validation("trials and samples must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BtFitArgs {
    /// CSV with header `winner,loser`.
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub pseudo_count: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

impl BtFitArgs {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.pseudo_count >= 0.0) || !self.pseudo_count.is_finite() {
            return Err(CliError::validation("pseudo count must be finite and non-negative"));
        }
        check_positive("tolerance", self.tolerance)?;
        if self.max_iter == 0 {
            return Err(CliError::validation("max-iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecomposeArgs {
    /// Per-reference MMD (e.g. `mmd_per_ref.csv` from eval-gen).
    #[arg(long)]
    pub mmd: PathBuf,
    /// Per-item reconstruction CD.
    #[arg(long)]
    pub recon: PathBuf,
    /// Per-item compression CD.
    #[arg(long)]
    pub compression: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Value column of each CSV (default: the first column other than `id`).
    #[arg(long)]
    pub mmd_column: Option<String>,
    #[arg(long)]
    pub recon_column: Option<String>,
    #[arg(long)]
    pub compression_column: Option<String>,
}
