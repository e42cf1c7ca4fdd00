//! JSON config schema: one file per run, with a `command` discriminator.
//! Every stochastic command carries an explicit seed.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Generate a tiling of an interval or a box.
    Tile(TileConfig),
    /// Sample an i.i.d. configuration.
    Sample(SampleConfig),
    /// Empirical block distribution of a configuration.
    Emp(EmpConfig),
    /// Permutation distance between two finite partitions.
    D1(D1Config),
    /// Coupling distance between two block distributions.
    Dbar(DbarConfig),
    /// Block entropy rate scan.
    Entropy(EntropyConfig),
    /// Estimate a tile law from a source and resample the lift.
    Construct(ConstructConfig),
    /// Tile replacement sweep and entropy bisection.
    Interpolate(InterpolateConfig),
    /// Finite very-weak-Bernoulli criterion on a two-track sample.
    VwbTest(VwbTestConfig),
    /// Entropy comparison of a correlated source against its tile law.
    Audit(AuditConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tile(_) => "tile",
            Command::Sample(_) => "sample",
            Command::Emp(_) => "emp",
            Command::D1(_) => "d1",
            Command::Dbar(_) => "dbar",
            Command::Entropy(_) => "entropy",
            Command::Construct(_) => "construct",
            Command::Interpolate(_) => "interpolate",
            Command::VwbTest(_) => "vwb-test",
            Command::Audit(_) => "audit",
        }
    }

    pub fn seed_mut(&mut self) -> Option<&mut u64> {
        match self {
            Command::Tile(c) => Some(&mut c.seed),
            Command::Sample(c) => Some(&mut c.seed),
            Command::Construct(c) => Some(&mut c.seed),
            Command::Interpolate(c) => Some(&mut c.seed),
            Command::VwbTest(c) => c.sample.seed_mut(),
            Command::Audit(c) => Some(&mut c.seed),
            Command::Emp(_) | Command::D1(_) | Command::Dbar(_) | Command::Entropy(_) => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TileConfig {
    /// Interval length (dim 1) ...
    #[serde(default)]
    pub region_len: Option<i64>,
    /// ... or box sides (dim 2); exactly one of the two.
    #[serde(default)]
    pub region: Option<[i64; 2]>,
    /// Dim-1 tile lengths with weights.
    #[serde(default)]
    pub lengths: Option<Vec<(i64, f64)>>,
    /// Dim-2 rectangles `[w, h]` with weights.
    #[serde(default)]
    pub rects: Option<Vec<([i64; 2], f64)>>,
    #[serde(default = "default_mode")]
    pub mode: String,
    pub seed: u64,
}

fn default_mode() -> String {
    "remainder".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    /// Symbol masses, indexed by symbol.
    pub law: Vec<f64>,
    #[serde(default)]
    pub region_len: Option<i64>,
    #[serde(default)]
    pub region: Option<[i64; 2]>,
    pub seed: u64,
    /// "json" or "binary".
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "json".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EmpConfig {
    /// Path to a configuration artifact (.json or .bin).
    pub configuration: String,
    /// Test shape: an interval length ...
    #[serde(default)]
    pub test_shape_len: Option<i64>,
    /// ... or explicit points.
    #[serde(default)]
    pub test_shape: Option<Vec<[i64; 2]>>,
    #[serde(default)]
    pub normalized: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct D1Config {
    /// Joint cell-mass matrix; marginals are derived.
    pub joint: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DbarConfig {
    /// Paths to two block-distribution artifacts.
    pub p: String,
    pub q: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub configuration: String,
    pub box_sides: Vec<i64>,
    #[serde(default)]
    pub miller_madow: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    /// Source configuration to estimate the tile law from.
    pub source: String,
    pub lengths: Vec<(i64, f64)>,
    pub seed: u64,
    #[serde(default = "default_test_len")]
    pub test_shape_len: i64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Remainder symbol law (defaults to uniform over the source alphabet).
    #[serde(default)]
    pub remainder_law: Option<Vec<f64>>,
}

fn default_test_len() -> i64 {
    2
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolateConfig {
    pub source: String,
    pub lengths: Vec<(i64, f64)>,
    pub seed: u64,
    /// Replacement levels for the sweep CSV.
    #[serde(default = "default_grid")]
    pub t_grid: Vec<f64>,
    /// Optional bisection target (nats per cell).
    #[serde(default)]
    pub target_entropy: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_window")]
    pub window_side: i64,
    #[serde(default = "default_test_len")]
    pub test_shape_len: i64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// "typical" picks blocks near the global empirical measure;
    /// "constant:<symbol>" replaces with constant blocks.
    #[serde(default = "default_replacement")]
    pub replacement: String,
}

fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn default_tol() -> f64 {
    0.02
}

fn default_window() -> i64 {
    2
}

fn default_replacement() -> String {
    "typical".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum VwbSample {
    /// Read a two-column CSV (`p,r`).
    Csv { path: String },
    /// Independent i.i.d. binary tracks.
    Iid {
        len: usize,
        #[serde(default = "default_half")]
        p_base: f64,
        #[serde(default = "default_half")]
        p_fiber: f64,
        seed: u64,
    },
    /// Regime-switching fiber over an independent base.
    RegimeSwitch {
        len: usize,
        segment_len: usize,
        p_low: f64,
        p_high: f64,
        seed: u64,
    },
}

fn default_half() -> f64 {
    0.5
}

impl VwbSample {
    fn seed_mut(&mut self) -> Option<&mut u64> {
        match self {
            VwbSample::Csv { .. } => None,
            VwbSample::Iid { seed, .. } | VwbSample::RegimeSwitch { seed, .. } => Some(seed),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VwbTestConfig {
    pub sample: VwbSample,
    pub eps: f64,
    pub n_steps: usize,
    pub k0: usize,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    /// Target conditional entropy rate, nats per step.
    pub c: f64,
}

fn default_min_count() -> u64 {
    100
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditSource {
    /// One fair coin per sample, constant across the region.
    ConstantBlocks,
    /// Adjacent cells copy each other, out of phase with the tiles.
    PairedCells,
    /// Independent tiles resampled from a uniform content law.
    IndependentTiles,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub region_len: i64,
    pub tile_len: i64,
    pub samples: u64,
    pub trials: u64,
    pub source: AuditSource,
    pub seed: u64,
}
