//! Tile replacement along a monotone coupling: typical-block selection,
//! the phi_t replacement maps, cell-level distance between levels,
//! closeness audits, and bisection to a target entropy rate.
//!
//! The nested replacement family is realized by one uniform mark per tile
//! (replace iff mark < t), which gives exact nesting in t and replaced
//! mass proportional to t in expectation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::empirical::{
    averaged_tile_empirical, emp_block_normalized, emp_config_normalized, ClosenessSpec,
};
use crate::entropy::entropy_rate_at;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::symbolic::{Block, Configuration, Symbol};
use crate::tiling::{ShapeSystem, TilingSample};

/// Typical blocks per shape plus per-tile uniform marks.
#[derive(Clone, Debug)]
pub struct ReplacementPlan {
    shapes: ShapeSystem,
    typical_blocks: Vec<Block>,
    marks: Vec<f64>,
}

impl ReplacementPlan {
    /// Marks are i.i.d. uniform on `[0, 1)` given the seed, one per tile in
    /// tile order.
    pub fn new(t: &TilingSample, typical_blocks: Vec<Block>, seed: u64) -> Result<Self> {
        if typical_blocks.len() != t.shapes.len() {
            return Err(Error::PlanMismatch(format!(
                "{} typical blocks for {} shapes",
                typical_blocks.len(),
                t.shapes.len()
            )));
        }
        for (i, b) in typical_blocks.iter().enumerate() {
            if b.domain() != &t.shapes.shapes()[i] {
                return Err(Error::PlanMismatch(format!(
                    "typical block {} does not live on shape {}",
                    i + 1,
                    i + 1
                )));
            }
        }
        use rand::Rng;
        let mut rng = substream(seed, 0x9a11);
        let marks = (0..t.tiles.len()).map(|_| rng.gen::<f64>()).collect();
        Ok(ReplacementPlan { shapes: t.shapes.clone(), typical_blocks, marks })
    }

    pub fn typical_blocks(&self) -> &[Block] {
        &self.typical_blocks
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    fn check_against(&self, t: &TilingSample) -> Result<()> {
        if self.shapes != t.shapes {
            return Err(Error::PlanMismatch("shape systems differ".into()));
        }
        if self.marks.len() != t.tiles.len() {
            return Err(Error::PlanMismatch(format!(
                "{} marks for {} tiles",
                self.marks.len(),
                t.tiles.len()
            )));
        }
        Ok(())
    }

    /// Indices of tiles replaced at level `t_param`.
    pub fn replaced_tiles(&self, t_param: f64) -> impl Iterator<Item = usize> + '_ {
        self.marks
            .iter()
            .enumerate()
            .filter(move |&(_, &u)| u < t_param)
            .map(|(i, _)| i)
    }
}

/// Search result for the per-shape typical blocks.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeCandidateReport {
    pub shape_index: usize,
    pub candidates: usize,
    pub best_distance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct TypicalBlockSearch {
    /// One block per shape when every shape passed.
    pub blocks: Option<Vec<Block>>,
    pub per_shape: Vec<ShapeCandidateReport>,
}

impl TypicalBlockSearch {
    pub fn into_blocks(self) -> Result<Vec<Block>> {
        self.blocks.ok_or_else(|| {
            let detail = self
                .per_shape
                .iter()
                .filter(|r| !r.passed)
                .map(|r| format!("shape {}: best distance {:.6}", r.shape_index, r.best_distance))
                .collect::<Vec<_>>()
                .join("; ");
            Error::Invalid(format!("no typical block within tolerance ({detail})"))
        })
    }
}

/// For each shape, the occurring tile content whose normalized empirical
/// measure on the test shape is closest to the global one; a shape fails
/// when no candidate is closer than the tolerance.
pub fn pick_typical_blocks(
    w: &Configuration,
    t: &TilingSample,
    spec: &ClosenessSpec,
) -> Result<TypicalBlockSearch> {
    let global = emp_config_normalized(w, &spec.test_shape)?;
    let mut picks: Vec<Option<Block>> = vec![None; t.shapes.len()];
    let mut per_shape = Vec::new();
    for i in 1..=t.shapes.len() {
        let shape = &t.shapes.shapes()[i - 1];
        // Deduplicate contents; BTreeMap keeps the scan deterministic.
        let mut contents: BTreeMap<Vec<Symbol>, ()> = BTreeMap::new();
        for tile in t.tiles.iter().filter(|tile| tile.shape_index == i) {
            contents.insert(w.restrict(shape, tile.center)?.values().to_vec(), ());
        }
        let mut best: Option<(f64, Vec<Symbol>)> = None;
        for key in contents.keys() {
            let block = Block::new(shape.clone(), key.clone())?;
            let emp = emp_block_normalized(&block, &spec.test_shape)?;
            let d = emp.sup_distance(&global);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, key.clone()));
            }
        }
        let (best_distance, passed) = match &best {
            Some((d, key)) => {
                let passed = *d < spec.delta;
                if passed {
                    picks[i - 1] = Some(Block::new(shape.clone(), key.clone())?);
                }
                (*d, passed)
            }
            None => (f64::INFINITY, false),
        };
        per_shape.push(ShapeCandidateReport {
            shape_index: i,
            candidates: contents.len(),
            best_distance,
            passed,
        });
    }
    let blocks = picks.into_iter().collect::<Option<Vec<Block>>>();
    Ok(TypicalBlockSearch { blocks, per_shape })
}

/// The replacement map at level `t_param`: each tile whose mark is below
/// `t_param` gets its shape's typical block; everything else, including
/// the remainder, is untouched.
pub fn phi_t(
    w: &Configuration,
    t: &TilingSample,
    plan: &ReplacementPlan,
    t_param: f64,
) -> Result<Configuration> {
    if !(0.0..=1.0).contains(&t_param) {
        return Err(Error::Invalid(format!("level {t_param} outside [0, 1]")));
    }
    plan.check_against(t)?;
    let mut out = w.clone();
    for j in plan.replaced_tiles(t_param) {
        let tile = &t.tiles[j];
        let shape = t.shape_of(tile);
        let block = &plan.typical_blocks[tile.shape_index - 1];
        for (&p, &sym) in shape.points().iter().zip(block.values()) {
            let idx = w
                .region()
                .position(p + tile.center)
                .ok_or(Error::WindowEscapesRegion)?;
            out.values_mut()[idx] = sym;
        }
    }
    Ok(out)
}

/// Fraction of region cells on which the levels `t1 <= t2` disagree.
/// Only tiles with mark in `[t1, t2)` can differ, and there the
/// disagreement is the Hamming distance between the original content and
/// the typical block.
pub fn d1_between_levels(
    w: &Configuration,
    t: &TilingSample,
    plan: &ReplacementPlan,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    if t1 > t2 {
        return Err(Error::Invalid(format!("levels out of order: {t1} > {t2}")));
    }
    plan.check_against(t)?;
    let mut disagreeing = 0usize;
    for (j, tile) in t.tiles.iter().enumerate() {
        let u = plan.marks[j];
        if u >= t1 && u < t2 {
            let shape = t.shape_of(tile);
            let content = w.restrict(shape, tile.center)?;
            let alpha = &plan.typical_blocks[tile.shape_index - 1];
            disagreeing += content
                .values()
                .iter()
                .zip(alpha.values())
                .filter(|(a, b)| a != b)
                .count();
        }
    }
    Ok(disagreeing as f64 / w.region().len() as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpolationResult {
    pub t_star: f64,
    pub estimate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Bisection on the replacement level until the estimated entropy rate of
/// `phi_t(w)` is within `tol` of the target `c` (nats per cell). The
/// entropy is the plug-in rate at the declared window side; `tol` must
/// exceed three standard errors of that estimate.
#[allow(clippy::too_many_arguments)]
pub fn find_t_for_entropy(
    w: &Configuration,
    t: &TilingSample,
    plan: &ReplacementPlan,
    c: f64,
    tol: f64,
    max_iter: usize,
    window_side: i64,
) -> Result<InterpolationResult> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    let rate_at = |level: f64| -> Result<(f64, f64)> {
        let cfg = phi_t(w, t, plan, level)?;
        let entry = entropy_rate_at(&cfg, window_side, false, 100)?;
        Ok((entry.rate, entry.standard_error))
    };
    let (rate0, se0) = rate_at(0.0)?;
    let (rate1, _) = rate_at(1.0)?;
    let floor = 3.0 * se0;
    if tol < floor {
        return Err(Error::ToleranceBelowNoise { tol, floor });
    }
    if !(rate1 - tol <= c && c <= rate0 + tol) {
        return Err(Error::TargetOutsideRange { at_zero: rate0, at_one: rate1 });
    }
    if (rate0 - c).abs() < tol {
        return Ok(InterpolationResult { t_star: 0.0, estimate: rate0, iterations: 0, converged: true });
    }
    if (rate1 - c).abs() < tol {
        return Ok(InterpolationResult { t_star: 1.0, estimate: rate1, iterations: 0, converged: true });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut last = (0.5, rate0);
    for iter in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let (rate, _) = rate_at(mid)?;
        last = (mid, rate);
        if (rate - c).abs() < tol {
            return Ok(InterpolationResult {
                t_star: mid,
                estimate: rate,
                iterations: iter,
                converged: true,
            });
        }
        if rate > c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(InterpolationResult {
        t_star: last.0,
        estimate: last.1,
        iterations: max_iter,
        converged: false,
    })
}

/// The three closeness checks of the replacement argument: (a) the tile
/// average of the source is close to its global empirical measure, (b)
/// the tile average after replacement stays within twice the tolerance of
/// the source's global measure, (c) the tile average after replacement is
/// close to the replaced configuration's own global measure.
#[derive(Clone, Debug, Serialize)]
pub struct ClosenessAudit {
    pub dist_a: f64,
    pub dist_b: f64,
    pub dist_c: f64,
    pub pass_a: bool,
    pub pass_b: bool,
    pub pass_c: bool,
}

pub fn closeness_audit(
    w: &Configuration,
    t: &TilingSample,
    plan: &ReplacementPlan,
    t_param: f64,
    spec: &ClosenessSpec,
) -> Result<ClosenessAudit> {
    let k = &spec.test_shape;
    let global_source = emp_config_normalized(w, k)?;
    let avg_source = averaged_tile_empirical(w, t, k)?;
    let replaced = phi_t(w, t, plan, t_param)?;
    let avg_replaced = averaged_tile_empirical(&replaced, t, k)?;
    let global_replaced = emp_config_normalized(&replaced, k)?;

    let dist_a = avg_source.sup_distance(&global_source);
    let dist_b = avg_replaced.sup_distance(&global_source);
    let dist_c = avg_replaced.sup_distance(&global_replaced);
    Ok(ClosenessAudit {
        dist_a,
        dist_b,
        dist_c,
        pass_a: dist_a < spec.delta,
        pass_b: dist_b < 2.0 * spec.delta,
        pass_c: dist_c < spec.delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::sample_bernoulli;
    use crate::empirical::BlockDistribution;
    use crate::lattice::Shape;
    use crate::tiling::{tile_z, RemainderMode};

    fn fair() -> BlockDistribution {
        BlockDistribution::symbol_law(&[0.5, 0.5]).unwrap()
    }

    fn iid_setup(n: i64, tile_len: i64, seed: u64) -> (Configuration, TilingSample) {
        let w = sample_bernoulli(&fair(), &Shape::interval(n).unwrap(), seed).unwrap();
        let t = tile_z(n, &[(tile_len, 1.0)], RemainderMode::Remainder, seed ^ 0xff).unwrap();
        (w, t)
    }

    fn zeros_plan(t: &TilingSample, seed: u64) -> ReplacementPlan {
        let blocks = t
            .shapes
            .shapes()
            .iter()
            .map(|s| Block::constant(s.clone(), 0))
            .collect();
        ReplacementPlan::new(t, blocks, seed).unwrap()
    }

    #[test]
    fn pick_typical_constant_configuration() {
        let w = Configuration::constant(Shape::interval(12).unwrap(), 1);
        let t = tile_z(12, &[(4, 1.0)], RemainderMode::Remainder, 1).unwrap();
        let spec = ClosenessSpec::new(Shape::interval(2).unwrap(), 0.5).unwrap();
        let search = pick_typical_blocks(&w, &t, &spec).unwrap();
        assert_eq!(search.per_shape[0].best_distance, 0.0);
        let blocks = search.into_blocks().unwrap();
        assert!(blocks[0].values().iter().all(|&s| s == 1));
    }

    #[test]
    fn pick_typical_iid_succeeds() {
        let (w, t) = iid_setup(640_000, 64, 51);
        let spec = ClosenessSpec::new(Shape::interval(2).unwrap(), 0.1).unwrap();
        let search = pick_typical_blocks(&w, &t, &spec).unwrap();
        assert!(search.blocks.is_some(), "{:?}", search.per_shape);
        assert!(search.per_shape[0].best_distance < 0.05);
    }

    #[test]
    fn pick_typical_tiny_tolerance_fails_with_report() {
        let (w, t) = iid_setup(256, 8, 2);
        let spec = ClosenessSpec::new(Shape::interval(2).unwrap(), 1e-9).unwrap();
        let search = pick_typical_blocks(&w, &t, &spec).unwrap();
        assert!(search.blocks.is_none());
        assert!(search.per_shape[0].best_distance > 0.0);
        assert!(search.into_blocks().is_err());
    }

    #[test]
    fn phi_endpoints() {
        let (w, t) = iid_setup(1000, 4, 3);
        let plan = zeros_plan(&t, 4);
        let at0 = phi_t(&w, &t, &plan, 0.0).unwrap();
        assert_eq!(at0, w);

        let at1 = phi_t(&w, &t, &plan, 1.0).unwrap();
        for tile in &t.tiles {
            let content = at1.restrict(t.shape_of(tile), tile.center).unwrap();
            assert!(content.values().iter().all(|&s| s == 0));
        }
        // Remainder untouched.
        for &p in t.remainder.points() {
            assert_eq!(at1.value_at(p), w.value_at(p));
        }
    }

    #[test]
    fn phi_replaced_fraction_near_t() {
        let (w, t) = iid_setup(40_000, 4, 5);
        let plan = zeros_plan(&t, 6);
        assert_eq!(t.tiles.len(), 10_000);
        let replaced = plan.replaced_tiles(0.5).count() as f64 / t.tiles.len() as f64;
        assert!((replaced - 0.5).abs() < 0.02, "fraction {replaced}");
        let _ = phi_t(&w, &t, &plan, 0.5).unwrap();
    }

    #[test]
    fn monotone_nesting_is_exact() {
        let (_, t) = iid_setup(4000, 4, 7);
        let plan = zeros_plan(&t, 8);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        for pair in grid.windows(2) {
            let lower: std::collections::HashSet<usize> =
                plan.replaced_tiles(pair[0]).collect();
            let upper: std::collections::HashSet<usize> =
                plan.replaced_tiles(pair[1]).collect();
            assert!(lower.is_subset(&upper));
        }
    }

    #[test]
    fn d1_levels_examples() {
        let (w, t) = iid_setup(8000, 8, 9);
        let plan = zeros_plan(&t, 10);
        assert_eq!(d1_between_levels(&w, &t, &plan, 0.3, 0.3).unwrap(), 0.0);

        // If the source already equals the typical concatenation, any pair
        // of levels agrees.
        let zeros = Configuration::constant(w.region().clone(), 0);
        assert_eq!(d1_between_levels(&zeros, &t, &plan, 0.0, 1.0).unwrap(), 0.0);

        // Expectation bound: fraction <= (t2 - t1) and concentrates near
        // (t2 - t1) * E[per-tile hamming] = 0.5 * 0.5 for fair binary.
        let d = d1_between_levels(&w, &t, &plan, 0.2, 0.7).unwrap();
        let tiled = t.tiled_cell_count() as f64 / w.region().len() as f64;
        assert!(d <= 0.5 * tiled + 3.0 * 0.01);
        assert!((d - 0.25 * tiled).abs() < 0.02, "disagreement {d}");
    }

    #[test]
    fn d1_levels_matches_direct_comparison() {
        let (w, t) = iid_setup(2000, 5, 11);
        let plan = zeros_plan(&t, 12);
        for (t1, t2) in [(0.0, 0.3), (0.3, 0.8), (0.0, 1.0)] {
            let a = phi_t(&w, &t, &plan, t1).unwrap();
            let b = phi_t(&w, &t, &plan, t2).unwrap();
            let direct = a
                .values()
                .iter()
                .zip(b.values())
                .filter(|(x, y)| x != y)
                .count() as f64
                / w.region().len() as f64;
            let smart = d1_between_levels(&w, &t, &plan, t1, t2).unwrap();
            assert!((direct - smart).abs() < 1e-15);
        }
    }

    #[test]
    fn entropy_rate_non_increasing_along_t() {
        let (w, t) = iid_setup(200_000, 8, 13);
        let plan = zeros_plan(&t, 14);
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=5 {
            let level = i as f64 / 5.0;
            let cfg = phi_t(&w, &t, &plan, level).unwrap();
            let entry = entropy_rate_at(&cfg, 2, false, 100).unwrap();
            if let Some((prev_rate, prev_se)) = prev {
                let band = 2.0 * (prev_se + entry.standard_error);
                assert!(
                    entry.rate <= prev_rate + band,
                    "rate rose: {prev_rate} -> {} at t={level}",
                    entry.rate
                );
            }
            prev = Some((entry.rate, entry.standard_error));
        }
    }

    #[test]
    fn find_t_endpoints() {
        let (w, t) = iid_setup(100_000, 4, 15);
        let plan = zeros_plan(&t, 16);
        let rate0 = entropy_rate_at(&w, 2, false, 100).unwrap().rate;
        let r = find_t_for_entropy(&w, &t, &plan, rate0, 0.02, 20, 2).unwrap();
        assert_eq!(r.t_star, 0.0);

        let all = phi_t(&w, &t, &plan, 1.0).unwrap();
        let rate1 = entropy_rate_at(&all, 2, false, 100).unwrap().rate;
        let r = find_t_for_entropy(&w, &t, &plan, rate1, 0.02, 20, 2).unwrap();
        assert_eq!(r.t_star, 1.0);
    }

    #[test]
    fn find_t_half_log_two() {
        let (w, t) = iid_setup(200_000, 8, 17);
        let plan = zeros_plan(&t, 18);
        let c = 0.5 * 2.0f64.ln();
        let r = find_t_for_entropy(&w, &t, &plan, c, 0.02, 20, 2).unwrap();
        assert!(r.converged, "did not converge: {r:?}");
        assert!((r.estimate - c).abs() < 0.02);
        assert!(r.iterations <= 20);
    }

    #[test]
    fn find_t_bracket_violation() {
        let (w, t) = iid_setup(50_000, 4, 19);
        let plan = zeros_plan(&t, 20);
        assert!(matches!(
            find_t_for_entropy(&w, &t, &plan, 2.0, 0.02, 20, 2),
            Err(Error::TargetOutsideRange { .. })
        ));
    }

    #[test]
    fn find_t_noise_floor() {
        let (w, t) = iid_setup(50_000, 4, 21);
        let plan = zeros_plan(&t, 22);
        assert!(matches!(
            find_t_for_entropy(&w, &t, &plan, 0.3, 1e-9, 20, 2),
            Err(Error::ToleranceBelowNoise { .. })
        ));
    }

    #[test]
    fn audit_at_zero_collapses_to_step_a() {
        let (w, t) = iid_setup(50_000, 16, 23);
        let plan = zeros_plan(&t, 24);
        let spec = ClosenessSpec::new(Shape::interval(2).unwrap(), 0.05).unwrap();
        let audit = closeness_audit(&w, &t, &plan, 0.0, &spec).unwrap();
        assert_eq!(audit.dist_a, audit.dist_b);
        assert_eq!(audit.dist_a, audit.dist_c);
    }

    #[test]
    fn audit_constant_source_all_zero() {
        let w = Configuration::constant(Shape::interval(64).unwrap(), 0);
        let t = tile_z(64, &[(8, 1.0)], RemainderMode::Remainder, 25).unwrap();
        let plan = zeros_plan(&t, 26);
        let spec = ClosenessSpec::new(Shape::interval(2).unwrap(), 0.05).unwrap();
        let audit = closeness_audit(&w, &t, &plan, 0.7, &spec).unwrap();
        assert_eq!((audit.dist_a, audit.dist_b, audit.dist_c), (0.0, 0.0, 0.0));
        assert!(audit.pass_a && audit.pass_b && audit.pass_c);
    }

    #[test]
    fn audit_iid_passes() {
        let (w, t) = iid_setup(1_000_000, 64, 27);
        let spec = ClosenessSpec::new(Shape::interval(2).unwrap(), 0.05).unwrap();
        let picked = pick_typical_blocks(&w, &t, &spec).unwrap().into_blocks().unwrap();
        let plan = ReplacementPlan::new(&t, picked, 28).unwrap();
        let audit = closeness_audit(&w, &t, &plan, 0.5, &spec).unwrap();
        assert!(audit.pass_a && audit.pass_b && audit.pass_c, "{audit:?}");
    }
}
