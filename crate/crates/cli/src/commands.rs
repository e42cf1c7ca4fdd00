//! Command implementations: each takes its config, computes, and leaves
//! deterministic artifacts (JSON/CSV) plus a manifest in the output
//! directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::json;

use shiftlab_core::construct::{construct_lift, estimate_tile_law, entropy_defect_vs_coupled};
use shiftlab_core::empirical::{
    averaged_tile_empirical, emp_config, emp_config_normalized, is_close, BlockDistribution,
    ClosenessSpec,
};
use shiftlab_core::entropy::block_entropy_rate;
use shiftlab_core::interpolate::{
    find_t_for_entropy, phi_t, pick_typical_blocks, ReplacementPlan,
};
use shiftlab_core::lattice::{GroupPoint, Shape};
use shiftlab_core::metrics::{dbar, partition_d1, tv_dist, FinitePartitionMeasure};
use shiftlab_core::rng::substream;
use shiftlab_core::symbolic::{Alphabet, Block, Configuration};
use shiftlab_core::tiling::{tile_z, tile_z2, RemainderMode, TilingSample};
use shiftlab_core::vwb::{
    estimate_conditional_futures, iid_two_track, l5_criterion, lemma_over_transform,
    regime_switch_two_track, TwoTrackSample,
};

use crate::config::*;

/// Schema errors exit with 2, runtime errors with 1.
#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<shiftlab_core::Error> for CliError {
    fn from(e: shiftlab_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

/// Collects artifacts and writes the manifest at the end.
pub struct Workspace {
    out_dir: PathBuf,
    artifacts: Vec<String>,
}

impl Workspace {
    pub fn new(out_dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Workspace { out_dir: out_dir.to_path_buf(), artifacts: Vec::new() })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(self.out_dir.join(name), bytes)?;
        self.artifacts.push(name.to_string());
        info!("wrote {name} ({} bytes)", bytes.len());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn finish(mut self, command: &Command, seed: Option<u64>) -> CliResult<()> {
        let manifest = json!({
            "tool": "shiftlab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command.name(),
            "seed_override": seed,
            "config": command,
            "artifacts": self.artifacts,
        });
        self.artifacts = Vec::new();
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        std::fs::write(self.out_dir.join("manifest.json"), text)?;
        Ok(())
    }
}

fn load_configuration(path: &str) -> CliResult<Configuration> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {path}: {e}")))?;
    if path.ends_with(".bin") {
        Ok(Configuration::from_binary(&bytes)?)
    } else {
        serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Runtime(format!("cannot parse {path}: {e}")))
    }
}

fn load_distribution(path: &str) -> CliResult<BlockDistribution> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {path}: {e}")))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Runtime(format!("cannot parse {path}: {e}")))
}

fn parse_mode(mode: &str) -> CliResult<RemainderMode> {
    match mode {
        "remainder" => Ok(RemainderMode::Remainder),
        "shrink-last" => Ok(RemainderMode::ShrinkLast),
        other => Err(schema(format!("unknown remainder mode {other:?}"))),
    }
}

fn interval_region_len(w: &Configuration) -> CliResult<i64> {
    let region = w.region();
    if region.dim() != 1 {
        return Err(CliError::Runtime("this command needs a dim-1 configuration".into()));
    }
    match region.box_dims() {
        Some((origin, len, _)) if origin == GroupPoint::ORIGIN => Ok(len),
        _ => Err(CliError::Runtime("configuration region must be the interval [0, n)".into())),
    }
}

pub fn run(command: &Command, ws: &mut Workspace) -> CliResult<()> {
    match command {
        Command::Tile(cfg) => tile(cfg, ws),
        Command::Sample(cfg) => sample(cfg, ws),
        Command::Emp(cfg) => emp(cfg, ws),
        Command::D1(cfg) => d1(cfg, ws),
        Command::Dbar(cfg) => dbar_cmd(cfg, ws),
        Command::Entropy(cfg) => entropy(cfg, ws),
        Command::Construct(cfg) => construct(cfg, ws),
        Command::Interpolate(cfg) => interpolate(cfg, ws),
        Command::VwbTest(cfg) => vwb_test(cfg, ws),
        Command::Audit(cfg) => audit(cfg, ws),
    }
}

fn tile(cfg: &TileConfig, ws: &mut Workspace) -> CliResult<()> {
    let mode = parse_mode(&cfg.mode)?;
    let t: TilingSample = match (&cfg.region_len, &cfg.region, &cfg.lengths, &cfg.rects) {
        (Some(n), None, Some(lengths), None) => tile_z(*n, lengths, mode, cfg.seed)?,
        (None, Some([w, h]), None, Some(rects)) => {
            if mode != RemainderMode::Remainder {
                return Err(schema("shrink-last applies to dim-1 tilings only"));
            }
            let rects: Vec<((i64, i64), f64)> =
                rects.iter().map(|&([w, h], m)| ((w, h), m)).collect();
            tile_z2(*w, *h, &rects, cfg.seed)?
        }
        _ => {
            return Err(schema(
                "tile needs either region_len + lengths (dim 1) or region + rects (dim 2)",
            ))
        }
    };
    let violations = t.validate();
    ws.write_json("tiling.json", &t)?;
    println!(
        "tiles={} remainder_cells={} violations={}",
        t.tiles.len(),
        t.remainder.len(),
        violations.len()
    );
    Ok(())
}

fn sample(cfg: &SampleConfig, ws: &mut Workspace) -> CliResult<()> {
    let region = match (&cfg.region_len, &cfg.region) {
        (Some(n), None) => Shape::interval(*n)?,
        (None, Some([w, h])) => Shape::rect(*w, *h)?,
        _ => return Err(schema("sample needs exactly one of region_len or region")),
    };
    let law = BlockDistribution::symbol_law(&cfg.law)?;
    let w = shiftlab_core::construct::sample_bernoulli(&law, &region, cfg.seed)?;
    match cfg.format.as_str() {
        "json" => ws.write_json("configuration.json", &w)?,
        "binary" => ws.write_bytes("configuration.bin", &w.to_binary()?)?,
        other => return Err(schema(format!("unknown format {other:?}"))),
    }
    println!("cells={}", w.region().len());
    Ok(())
}

fn test_shape_from(
    test_shape_len: &Option<i64>,
    test_shape: &Option<Vec<[i64; 2]>>,
    dim: usize,
) -> CliResult<Shape> {
    match (test_shape_len, test_shape) {
        (Some(len), None) => Ok(Shape::interval(*len)?),
        (None, Some(points)) => {
            let pts = points.iter().map(|&[x, y]| GroupPoint::z2(x, y)).collect();
            Ok(Shape::new(dim, pts)?)
        }
        _ => Err(schema("need exactly one of test_shape_len or test_shape")),
    }
}

fn emp(cfg: &EmpConfig, ws: &mut Workspace) -> CliResult<()> {
    let w = load_configuration(&cfg.configuration)?;
    let k = test_shape_from(&cfg.test_shape_len, &cfg.test_shape, w.region().dim())?;
    let dist = if cfg.normalized {
        emp_config_normalized(&w, &k)?
    } else {
        emp_config(&w, &k)?
    };
    println!("total={} support={}", dist.total(), dist.support_len());
    ws.write_json("distribution.json", &dist)
}

fn d1(cfg: &D1Config, ws: &mut Workspace) -> CliResult<()> {
    let pm = FinitePartitionMeasure::from_joint(cfg.joint.clone())?;
    let value = partition_d1(&pm);
    println!("d1={value}");
    ws.write_json("d1.json", &json!({ "value": value }))
}

fn dbar_cmd(cfg: &DbarConfig, ws: &mut Workspace) -> CliResult<()> {
    let p = load_distribution(&cfg.p)?;
    let q = load_distribution(&cfg.q)?;
    let (value, coupling) = dbar(&p, &q)?;
    let half_dist = tv_dist(&p, &q)? / 2.0;
    println!("dbar={value}");
    ws.write_json("coupling.json", &coupling)?;
    ws.write_json(
        "dbar.json",
        &json!({
            "value": value,
            "half_dist": half_dist,
            "coupling_marginal_gap": coupling.marginal_gap(&p, &q),
        }),
    )
}

fn entropy(cfg: &EntropyConfig, ws: &mut Workspace) -> CliResult<()> {
    let w = load_configuration(&cfg.configuration)?;
    let entries = block_entropy_rate(&w, &cfg.box_sides, cfg.miller_madow)?;
    let mut csv = String::from("n,window_cells,window_entropy,rate,standard_error,positions,support\n");
    for e in &entries {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            e.n, e.window_cells, e.window_entropy, e.rate, e.standard_error, e.positions, e.support
        )
        .unwrap();
    }
    for e in &entries {
        println!("n={} rate={} se={}", e.n, e.rate, e.standard_error);
    }
    ws.write_bytes("entropy.csv", csv.as_bytes())
}

fn construct(cfg: &ConstructConfig, ws: &mut Workspace) -> CliResult<()> {
    let source = load_configuration(&cfg.source)?;
    let n = interval_region_len(&source)?;
    let t = tile_z(n, &cfg.lengths, RemainderMode::Remainder, substream_seed(cfg.seed, 1))?;
    let law = estimate_tile_law(&source, &t)?;
    let alphabet = source.inferred_alphabet();
    let remainder_law = match &cfg.remainder_law {
        Some(masses) => BlockDistribution::symbol_law(masses)?,
        None => {
            let size = alphabet.size() as usize;
            BlockDistribution::symbol_law(&vec![1.0 / size as f64; size])?
        }
    };
    let lifted = construct_lift(&t, &law, &remainder_law, substream_seed(cfg.seed, 2))?;

    let k = Shape::interval(cfg.test_shape_len)?;
    let spec = ClosenessSpec::new(k.clone(), cfg.delta)
        .map_err(|e| schema(e.to_string()))?;
    let emp_lift = emp_config_normalized(&lifted, &k)?;
    let emp_src = emp_config_normalized(&source, &k)?;
    let close = is_close(&emp_lift, &emp_src, &spec)?;
    let avg_lift = averaged_tile_empirical(&lifted, &t, &k)?;
    let avg_src = averaged_tile_empirical(&source, &t, &k)?;

    ws.write_json("tiling.json", &t)?;
    ws.write_json("tile-law.json", &law)?;
    ws.write_bytes("lifted.bin", &lifted.to_binary()?)?;
    let report = json!({
        "tiles": t.tiles.len(),
        "is_close_to_source": close,
        "sup_distance": emp_lift.sup_distance(&emp_src),
        "tile_average_distance": avg_lift.sup_distance(&avg_src),
        "test_shape_len": cfg.test_shape_len,
        "delta": cfg.delta,
    });
    println!(
        "is_close={} sup_distance={:.6}",
        close,
        emp_lift.sup_distance(&emp_src)
    );
    ws.write_json("report.json", &report)
}

fn substream_seed(seed: u64, tag: u64) -> u64 {
    // Stable per-stage seeds derived from the run seed.
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ tag
}

fn interpolate(cfg: &InterpolateConfig, ws: &mut Workspace) -> CliResult<()> {
    let source = load_configuration(&cfg.source)?;
    let n = interval_region_len(&source)?;
    let t = tile_z(n, &cfg.lengths, RemainderMode::Remainder, substream_seed(cfg.seed, 3))?;
    let spec = ClosenessSpec::new(Shape::interval(cfg.test_shape_len)?, cfg.delta)
        .map_err(|e| schema(e.to_string()))?;

    let blocks: Vec<Block> = if cfg.replacement == "typical" {
        pick_typical_blocks(&source, &t, &spec)?.into_blocks()?
    } else if let Some(sym) = cfg.replacement.strip_prefix("constant:") {
        let sym: u32 = sym
            .parse()
            .map_err(|_| schema(format!("bad replacement {:?}", cfg.replacement)))?;
        t.shapes
            .shapes()
            .iter()
            .map(|s| Block::constant(s.clone(), sym))
            .collect()
    } else {
        return Err(schema(format!("unknown replacement {:?}", cfg.replacement)));
    };
    let plan = ReplacementPlan::new(&t, blocks, substream_seed(cfg.seed, 4))?;

    let mut csv = String::from("t,rate,standard_error\n");
    for &level in &cfg.t_grid {
        let cfg_at = phi_t(&source, &t, &plan, level)?;
        let entry =
            shiftlab_core::entropy::entropy_rate_at(&cfg_at, cfg.window_side, false, 100)?;
        writeln!(csv, "{},{},{}", level, entry.rate, entry.standard_error).unwrap();
        println!("t={} rate={} se={}", level, entry.rate, entry.standard_error);
    }
    ws.write_bytes("interpolate.csv", csv.as_bytes())?;

    if let Some(c) = cfg.target_entropy {
        let r = find_t_for_entropy(&source, &t, &plan, c, cfg.tol, 20, cfg.window_side)?;
        println!(
            "t_star={} estimate={} iterations={} converged={}",
            r.t_star, r.estimate, r.iterations, r.converged
        );
        ws.write_json("bisection.json", &r)?;
    }
    Ok(())
}

fn vwb_test(cfg: &VwbTestConfig, ws: &mut Workspace) -> CliResult<()> {
    let sample: TwoTrackSample = match &cfg.sample {
        VwbSample::Csv { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(format!("cannot read {path}: {e}")))?;
            TwoTrackSample::from_csv(&text)?
        }
        VwbSample::Iid { len, p_base, p_fiber, seed } => {
            iid_two_track(*len, *p_base, *p_fiber, *seed)
        }
        VwbSample::RegimeSwitch { len, segment_len, p_low, p_high, seed } => {
            regime_switch_two_track(*len, *segment_len, *p_low, *p_high, *seed)
        }
    };
    let report = l5_criterion(&sample, cfg.eps, cfg.n_steps, cfg.k0, cfg.min_count, cfg.c)?;
    let futures = estimate_conditional_futures(&sample, cfg.k0, cfg.n_steps, cfg.min_count)?;
    let family: Vec<(u64, u64)> = futures.cells.keys().copied().collect();
    let over = lemma_over_transform(&futures, &family, cfg.eps)?;

    println!(
        "cc={} dd={} ee={} kept_mass={:.6} worst_dd={:.6}",
        report.cc, report.dd, report.ee, report.kept_mass, report.worst_dd_dbar
    );
    let mut csv = String::from(
        "eps,n_steps,k0,cc,dd,ee,kept_mass,worst_dd_dbar,conditional_entropy,threshold\n",
    );
    writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{},{}",
        cfg.eps,
        cfg.n_steps,
        cfg.k0,
        report.cc,
        report.dd,
        report.ee,
        report.kept_mass,
        report.worst_dd_dbar,
        report.conditional_entropy,
        report.threshold
    )
    .unwrap();
    ws.write_bytes("summary.csv", csv.as_bytes())?;
    ws.write_json("report.json", &json!({ "l5": report, "over": over }))
}

fn audit(cfg: &AuditConfig, ws: &mut Workspace) -> CliResult<()> {
    use rand::Rng;
    if cfg.region_len > 20 {
        return Err(schema("audit regions are enumerated exhaustively; use region_len <= 20"));
    }
    let region = Shape::interval(cfg.region_len)?;
    let mut csv =
        String::from("trial,lhs_nats,rhs_nats,remainder_budget_nats,lhs_per_cell,rhs_per_cell,gap_per_cell,within_budget\n");
    let mut all_ok = true;
    for trial in 0..cfg.trials {
        let t = tile_z(
            cfg.region_len,
            &[(cfg.tile_len, 1.0)],
            RemainderMode::Remainder,
            substream_seed(cfg.seed, 10 + trial),
        )?;
        let base = substream_seed(cfg.seed, 1000 + trial);
        let samples: Vec<Configuration> = match cfg.source {
            AuditSource::ConstantBlocks => (0..cfg.samples)
                .map(|s| {
                    let mut rng = substream(base, s);
                    Configuration::constant(region.clone(), rng.gen_range(0..2u32))
                })
                .collect(),
            AuditSource::PairedCells => (0..cfg.samples)
                .map(|s| {
                    let mut rng = substream(base, s);
                    let mut values = vec![0u32; cfg.region_len as usize];
                    for i in 0..(cfg.region_len as usize / 2) {
                        let v = rng.gen_range(0..2u32);
                        values[2 * i] = v;
                        values[2 * i + 1] = v;
                    }
                    Configuration::new(region.clone(), values).unwrap()
                })
                .collect(),
            AuditSource::IndependentTiles => {
                let uniform = BlockDistribution::uniform(
                    Shape::interval(cfg.tile_len)?,
                    2,
                )?;
                let law = shiftlab_core::construct::TileLaw::new(
                    t.shapes.clone(),
                    vec![uniform; t.shapes.len()],
                )?;
                let fair = BlockDistribution::symbol_law(&[0.5, 0.5])?;
                (0..cfg.samples)
                    .map(|s| construct_lift(&t, &law, &fair, substream_seed(base, s)))
                    .collect::<Result<_, _>>()?
            }
        };
        let r = entropy_defect_vs_coupled(&samples, &t, Alphabet::BINARY)?;
        let within = r.lhs_nats <= r.rhs_nats + r.remainder_budget_nats + 1e-9;
        all_ok &= within;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            trial,
            r.lhs_nats,
            r.rhs_nats,
            r.remainder_budget_nats,
            r.lhs_per_cell(),
            r.rhs_per_cell(),
            r.rhs_per_cell() - r.lhs_per_cell(),
            within
        )
        .unwrap();
    }
    println!("trials={} within_budget={}", cfg.trials, all_ok);
    ws.write_bytes("audit.csv", csv.as_bytes())?;
    if !all_ok {
        return Err(CliError::Runtime("entropy budget violated".into()));
    }
    Ok(())
}
