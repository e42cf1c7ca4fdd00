//! Empirical block distributions, Folner-limit diagnostics, test-block
//! closeness, and tile-averaged empirical measures.
//!
//! The plain empirical measure is a sub-probability (the window count is
//! divided by the size of the carrier, not by the number of valid
//! positions); the normalized variant used by the metric layer rescales it
//! to a probability.

use std::collections::HashMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::Shape;
use crate::symbolic::{Block, Configuration, Symbol};
use crate::tiling::TilingSample;

pub const PROB_TOL: f64 = 1e-9;

/// A sparse (sub-)probability distribution over blocks sharing one domain
/// shape. Keys are value vectors in the domain's row-major order.
#[derive(Clone, PartialEq, Debug)]
pub struct BlockDistribution {
    domain: Shape,
    weights: std::collections::BTreeMap<Vec<Symbol>, f64>,
    total: f64,
}

impl BlockDistribution {
    pub fn empty(domain: Shape) -> Self {
        BlockDistribution { domain, weights: Default::default(), total: 0.0 }
    }

    /// Builds a distribution from `(values, mass)` pairs; masses of repeated
    /// keys accumulate.
    pub fn from_weights(
        domain: Shape,
        entries: impl IntoIterator<Item = (Vec<Symbol>, f64)>,
    ) -> Result<Self> {
        let mut weights = std::collections::BTreeMap::new();
        let mut total = 0.0;
        for (key, mass) in entries {
            if key.len() != domain.len() {
                return Err(Error::Invalid(format!(
                    "block key of {} symbols for a domain of {} cells",
                    key.len(),
                    domain.len()
                )));
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidDistribution(format!("bad mass {mass}")));
            }
            total += mass;
            *weights.entry(key).or_insert(0.0) += mass;
        }
        Ok(BlockDistribution { domain, weights, total })
    }

    /// All mass on a single block.
    pub fn point_mass(block: &Block) -> Self {
        let mut weights = std::collections::BTreeMap::new();
        weights.insert(block.values().to_vec(), 1.0);
        BlockDistribution { domain: block.domain().clone(), weights, total: 1.0 }
    }

    /// Uniform distribution over all `size^|domain|` blocks (use only for
    /// small domains).
    pub fn uniform(domain: Shape, alphabet_size: u32) -> Result<Self> {
        let cells = domain.len();
        let count = (alphabet_size as u64).checked_pow(cells as u32).ok_or_else(|| {
            Error::Invalid("uniform block distribution would overflow".into())
        })?;
        if count > 1 << 22 {
            return Err(Error::Invalid(format!(
                "uniform block distribution over {count} blocks is too large"
            )));
        }
        let mass = 1.0 / count as f64;
        let mut weights = std::collections::BTreeMap::new();
        let mut key = vec![0 as Symbol; cells];
        loop {
            weights.insert(key.clone(), mass);
            let mut i = 0;
            loop {
                if i == cells {
                    let total = 1.0;
                    return Ok(BlockDistribution { domain, weights, total });
                }
                key[i] += 1;
                if key[i] < alphabet_size {
                    break;
                }
                key[i] = 0;
                i += 1;
            }
        }
    }

    /// Law of a single symbol: masses indexed by symbol on the origin shape.
    pub fn symbol_law(masses: &[f64]) -> Result<Self> {
        let domain = Shape::interval(1)?;
        Self::from_weights(
            domain,
            masses
                .iter()
                .enumerate()
                .filter(|&(_, &m)| m != 0.0)
                .map(|(s, &m)| (vec![s as Symbol], m)),
        )
    }

    pub fn domain(&self) -> &Shape {
        &self.domain
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn mass(&self, key: &[Symbol]) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }

    pub fn mass_of_block(&self, block: &Block) -> Result<f64> {
        let norm_self = match self.domain.min_point() {
            Some(min) => self.domain.translate(min.neg()),
            None => self.domain.clone(),
        };
        if block.normalize().domain() != &norm_self {
            return Err(Error::DomainMismatch);
        }
        Ok(self.mass(block.values()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Symbol], f64)> {
        self.weights.iter().map(|(k, &m)| (k.as_slice(), m))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (Block, f64)> + '_ {
        self.weights
            .iter()
            .map(|(k, &m)| (Block::new(self.domain.clone(), k.clone()).unwrap(), m))
    }

    pub fn is_probability(&self) -> bool {
        (self.total - 1.0).abs() <= PROB_TOL
    }

    pub fn ensure_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbability(self.total))
        }
    }

    /// Rescales to total mass one.
    pub fn normalized(&self) -> Result<Self> {
        if self.total <= 0.0 {
            return Err(Error::NoValidPositions);
        }
        let mut out = self.clone();
        for m in out.weights.values_mut() {
            *m /= self.total;
        }
        out.total = out.weights.values().sum();
        Ok(out)
    }

    /// Sup-norm distance over the union of supports.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, &m) in &self.weights {
            worst = worst.max((m - other.mass(k)).abs());
        }
        for (k, &m) in &other.weights {
            if !self.weights.contains_key(k) {
                worst = worst.max(m.abs());
            }
        }
        worst
    }

    /// l1 distance over the union of supports.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let mut sum = 0.0;
        for (k, &m) in &self.weights {
            sum += (m - other.mass(k)).abs();
        }
        for (k, &m) in &other.weights {
            if !self.weights.contains_key(k) {
                sum += m.abs();
            }
        }
        sum
    }

    /// Convex combination accumulator: `self += coeff * other` (domains
    /// must match).
    pub fn accumulate(&mut self, other: &Self, coeff: f64) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        for (k, &m) in &other.weights {
            *self.weights.entry(k.clone()).or_insert(0.0) += coeff * m;
        }
        self.total += coeff * other.total;
        Ok(())
    }
}

// Distributions serialize as `{domain, entries}` with entries as
// `[block-string, mass]` pairs sorted lexicographically; block strings are
// comma-joined symbols in row-major domain order.
impl Serialize for BlockDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let entries: Vec<(String, f64)> = self
            .weights
            .iter()
            .map(|(k, &m)| {
                let s = k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                (s, m)
            })
            .collect();
        let mut st = serializer.serialize_struct("BlockDistribution", 2)?;
        st.serialize_field("domain", &self.domain)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct DistRepr {
    domain: Shape,
    entries: Vec<(String, f64)>,
}

impl<'de> Deserialize<'de> for BlockDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DistRepr::deserialize(deserializer)?;
        let entries: std::result::Result<Vec<(Vec<Symbol>, f64)>, D::Error> = repr
            .entries
            .into_iter()
            .map(|(s, m)| {
                let key: std::result::Result<Vec<Symbol>, _> = if s.is_empty() {
                    Ok(Vec::new())
                } else {
                    s.split(',').map(|t| t.parse::<Symbol>()).collect()
                };
                key.map(|k| (k, m)).map_err(|e| D::Error::custom(format!("bad block key: {e}")))
            })
            .collect();
        BlockDistribution::from_weights(repr.domain, entries?).map_err(D::Error::custom)
    }
}

/// Closeness is judged per test block: sup-norm agreement below `delta`
/// on the blocks of the test shape.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosenessSpec {
    pub test_shape: Shape,
    pub delta: f64,
}

impl ClosenessSpec {
    pub fn new(test_shape: Shape, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Invalid(format!("tolerance {delta} must be positive")));
        }
        Ok(ClosenessSpec { test_shape, delta })
    }
}

/// Counts the occurrences of each `K`-window inside the carrier; returns
/// the number of valid positions and the per-key counts.
fn count_windows(
    carrier: &Shape,
    values: &[Symbol],
    k: &Shape,
) -> Result<(usize, HashMap<Vec<Symbol>, u64>)> {
    if carrier.is_empty() || k.is_empty() {
        return Err(Error::EmptyShape);
    }
    if carrier.dim() != k.dim() {
        return Err(Error::DimMismatch(carrier.dim(), k.dim()));
    }
    let k_points = k.points();
    let k0 = k_points[0];
    let mut counts: HashMap<Vec<Symbol>, u64> = HashMap::new();
    let mut key: Vec<Symbol> = Vec::with_capacity(k_points.len());
    let mut positions = 0usize;
    'outer: for (idx, &f0) in carrier.points().iter().enumerate() {
        let g = f0 - k0;
        key.clear();
        key.push(values[idx]);
        for &kp in &k_points[1..] {
            match carrier.position(kp + g) {
                Some(i) => key.push(values[i]),
                None => continue 'outer,
            }
        }
        positions += 1;
        if let Some(c) = counts.get_mut(key.as_slice()) {
            *c += 1;
        } else {
            counts.insert(key.clone(), 1);
        }
    }
    Ok((positions, counts))
}

fn emp_from_counts(
    k: &Shape,
    positions: usize,
    counts: HashMap<Vec<Symbol>, u64>,
    denominator: f64,
) -> BlockDistribution {
    let weights: std::collections::BTreeMap<Vec<Symbol>, f64> = counts
        .into_iter()
        .map(|(key, c)| (key, c as f64 / denominator))
        .collect();
    BlockDistribution {
        domain: k.clone(),
        total: positions as f64 / denominator,
        weights,
    }
}

/// Paper-exact empirical measure of `K`-blocks in the block `beta`:
/// window counts divided by the size of beta's domain. A test shape that
/// never fits yields the empty distribution with total 0.
pub fn emp_block(beta: &Block, k: &Shape) -> Result<BlockDistribution> {
    let (positions, counts) = count_windows(beta.domain(), beta.values(), k)?;
    Ok(emp_from_counts(k, positions, counts, beta.domain().len() as f64))
}

/// Probability-normalized empirical measure (counts divided by the number
/// of valid positions).
pub fn emp_block_normalized(beta: &Block, k: &Shape) -> Result<BlockDistribution> {
    let (positions, counts) = count_windows(beta.domain(), beta.values(), k)?;
    if positions == 0 {
        return Err(Error::NoValidPositions);
    }
    Ok(emp_from_counts(k, positions, counts, positions as f64))
}

/// [`emp_block`] for a configuration viewed as a block on its region.
pub fn emp_config(w: &Configuration, k: &Shape) -> Result<BlockDistribution> {
    let (positions, counts) = count_windows(w.region(), w.values(), k)?;
    Ok(emp_from_counts(k, positions, counts, w.region().len() as f64))
}

/// [`emp_block_normalized`] for a configuration.
pub fn emp_config_normalized(w: &Configuration, k: &Shape) -> Result<BlockDistribution> {
    let (positions, counts) = count_windows(w.region(), w.values(), k)?;
    if positions == 0 {
        return Err(Error::NoValidPositions);
    }
    Ok(emp_from_counts(k, positions, counts, positions as f64))
}

/// One row of the Folner convergence diagnostic.
#[derive(Clone, Debug, Serialize)]
pub struct FolnerEntry {
    pub n: i64,
    pub distribution: BlockDistribution,
    /// Total-variation-style l1 distance to the previous entry.
    pub l1_to_prev: Option<f64>,
    /// l1 distance to the largest-box entry.
    pub l1_to_final: f64,
}

/// Normalized empirical distributions over growing Folner boxes anchored
/// at the region's minimal corner, with successive and to-final distances.
/// The caller judges Cauchy behavior.
pub fn folner_convergence(
    w: &Configuration,
    k: &Shape,
    box_sides: &[i64],
) -> Result<Vec<FolnerEntry>> {
    let anchor = w.region().min_point().ok_or(Error::EmptyShape)?;
    let mut dists = Vec::with_capacity(box_sides.len());
    for &n in box_sides {
        let fbox = crate::lattice::folner_box(w.region().dim(), n)?;
        if !fbox.translate(anchor).is_subset_of(w.region()) {
            return Err(Error::Invalid(format!("box of side {n} exceeds region")));
        }
        let sub = w.restrict(&fbox, anchor)?;
        dists.push((n, emp_block_normalized(&sub, k)?));
    }
    let last = dists.last().map(|(_, d)| d.clone()).ok_or(Error::EmptyShape)?;
    let mut out = Vec::with_capacity(dists.len());
    let mut prev: Option<BlockDistribution> = None;
    for (n, d) in dists {
        out.push(FolnerEntry {
            n,
            l1_to_prev: prev.as_ref().map(|p| p.l1_distance(&d)),
            l1_to_final: last.l1_distance(&d),
            distribution: d.clone(),
        });
        prev = Some(d);
    }
    Ok(out)
}

/// Per-block agreement `|P(a) - Q(a)| < delta` for every block of the test
/// shape (sup-norm over the union of supports).
pub fn is_close(p: &BlockDistribution, q: &BlockDistribution, spec: &ClosenessSpec) -> Result<bool> {
    if p.domain() != &spec.test_shape || q.domain() != &spec.test_shape {
        return Err(Error::DomainMismatch);
    }
    Ok(p.sup_distance(q) < spec.delta)
}

/// Tile-averaged empirical measure: the per-tile normalized empirical
/// measures averaged with weights proportional to tile cell counts.
pub fn averaged_tile_empirical(
    w: &Configuration,
    t: &TilingSample,
    k: &Shape,
) -> Result<BlockDistribution> {
    if t.tiles.is_empty() {
        return Err(Error::Invalid("tiling has no tiles to average over".into()));
    }
    for (i, shape) in t.shapes.shapes().iter().enumerate() {
        let occurs = t.tiles.iter().any(|tile| tile.shape_index == i + 1);
        if occurs && fit_count(shape, k) == 0 {
            return Err(Error::TestShapeDoesNotFit(format!(
                "test shape never fits inside tile shape {}",
                i + 1
            )));
        }
    }
    let total_cells: usize = t.tiled_cell_count();
    let mut acc = BlockDistribution::empty(k.clone());
    for tile in &t.tiles {
        let shape = t.shape_of(tile);
        let local = w.restrict(shape, tile.center)?;
        let per_tile = emp_block_normalized(&local, k)?;
        acc.accumulate(&per_tile, shape.len() as f64 / total_cells as f64)?;
    }
    Ok(acc)
}

fn fit_count(carrier: &Shape, k: &Shape) -> usize {
    if carrier.is_empty() || k.is_empty() || carrier.dim() != k.dim() {
        return 0;
    }
    let k0 = k.points()[0];
    carrier
        .points()
        .iter()
        .filter(|&&f0| {
            let g = f0 - k0;
            k.points().iter().all(|&kp| carrier.contains(kp + g))
        })
        .count()
}

/// Exact sup-norm bound on the gap between the tile-averaged and the
/// global normalized empirical measure, computed purely from the tiling
/// geometry: `cross/N + sum_tiles |w_tile - n_tile/N|` where `cross`
/// counts windows not interior to any single tile.
pub fn tile_average_bound(t: &TilingSample, k: &Shape) -> Result<f64> {
    let n_global = fit_count(&t.region, k);
    if n_global == 0 {
        return Err(Error::NoValidPositions);
    }
    let total_cells = t.tiled_cell_count() as f64;
    let mut interior = 0usize;
    let mut weight_gap = 0.0;
    for tile in &t.tiles {
        let shape = t.shape_of(tile);
        let n_tile = fit_count(shape, k);
        interior += n_tile;
        weight_gap +=
            (shape.len() as f64 / total_cells - n_tile as f64 / n_global as f64).abs();
    }
    let cross = n_global - interior;
    Ok(cross as f64 / n_global as f64 + weight_gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GroupPoint;
    use crate::rng::seeded;
    use crate::tiling::{tile_z, RemainderMode};
    use rand::Rng;

    fn zblock(values: &[Symbol]) -> Block {
        Block::new(Shape::interval(values.len() as i64).unwrap(), values.to_vec()).unwrap()
    }

    fn iid_config(n: i64, p_one: f64, seed: u64) -> Configuration {
        let mut rng = seeded(seed);
        let values: Vec<Symbol> =
            (0..n).map(|_| u32::from(rng.gen::<f64>() < p_one)).collect();
        Configuration::new(Shape::interval(n).unwrap(), values).unwrap()
    }

    #[test]
    fn emp_block_example() {
        let beta = zblock(&[0, 1, 0, 1]);
        let k = Shape::interval(2).unwrap();
        let d = emp_block(&beta, &k).unwrap();
        assert_eq!(d.mass(&[0, 1]), 2.0 / 4.0);
        assert_eq!(d.mass(&[1, 0]), 1.0 / 4.0);
        assert_eq!(d.total(), 3.0 / 4.0);

        // Integer arithmetic identity: total == positions / |F| exactly.
        assert_eq!(d.total(), 3.0 / 4.0);

        // K = F: point mass 1/|F| on beta itself.
        let whole = emp_block(&beta, beta.domain()).unwrap();
        assert_eq!(whole.mass(beta.values()), 1.0 / 4.0);
        assert_eq!(whole.support_len(), 1);

        // Constant block, K = {0}.
        let c = zblock(&[7, 7, 7]);
        let d = emp_block(&c, &Shape::interval(1).unwrap()).unwrap();
        assert_eq!(d.mass(&[7]), 1.0);
        assert_eq!(d.total(), 1.0);
    }

    #[test]
    fn emp_block_never_fits() {
        let beta = zblock(&[0, 1]);
        let k = Shape::interval(5).unwrap();
        let d = emp_block(&beta, &k).unwrap();
        assert_eq!(d.total(), 0.0);
        assert_eq!(d.support_len(), 0);
        assert!(matches!(
            emp_block_normalized(&beta, &k),
            Err(Error::NoValidPositions)
        ));
    }

    #[test]
    fn emp_normalized_examples() {
        let beta = zblock(&[0, 1, 0, 1]);
        let k = Shape::interval(2).unwrap();
        let d = emp_block_normalized(&beta, &k).unwrap();
        assert!((d.mass(&[0, 1]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.mass(&[1, 0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!(d.is_probability());

        // K = {0}: exact symbol frequencies.
        let d = emp_block_normalized(&beta, &Shape::interval(1).unwrap()).unwrap();
        assert_eq!(d.mass(&[0]), 0.5);
        assert_eq!(d.mass(&[1]), 0.5);

        // Full-domain K: point mass 1.
        let d = emp_block_normalized(&beta, beta.domain()).unwrap();
        assert_eq!(d.mass(beta.values()), 1.0);
    }

    #[test]
    fn emp_2d_window() {
        // 2x2 checkerboard on a 4x4 box.
        let region = Shape::rect(4, 4).unwrap();
        let values: Vec<Symbol> = region
            .points()
            .iter()
            .map(|p| ((p.x + p.y) % 2) as Symbol)
            .collect();
        let w = Configuration::new(region, values).unwrap();
        let k = Shape::new(2, vec![GroupPoint::z2(0, 0), GroupPoint::z2(1, 0)]).unwrap();
        let d = emp_config_normalized(&w, &k).unwrap();
        assert_eq!(d.mass(&[0, 1]), 0.5);
        assert_eq!(d.mass(&[1, 0]), 0.5);
    }

    #[test]
    fn folner_convergence_constant_and_alternating() {
        let w = Configuration::constant(Shape::interval(64).unwrap(), 3);
        let k = Shape::interval(1).unwrap();
        let entries = folner_convergence(&w, &k, &[4, 8, 16, 32, 64]).unwrap();
        for e in &entries {
            assert_eq!(e.l1_to_final, 0.0);
        }

        // Alternating 0101...: even boxes give masses -> 1/2, 1/2.
        let values: Vec<Symbol> = (0..100).map(|i| (i % 2) as Symbol).collect();
        let w = Configuration::new(Shape::interval(100).unwrap(), values).unwrap();
        let k = Shape::interval(2).unwrap();
        let entries = folner_convergence(&w, &k, &[10, 20, 50, 100]).unwrap();
        let last = &entries.last().unwrap().distribution;
        // Exact counts at n=100: 50 of "01", 49 of "10" over 99 positions.
        assert!((last.mass(&[0, 1]) - 50.0 / 99.0).abs() < 1e-15);
        assert!((last.mass(&[1, 0]) - 49.0 / 99.0).abs() < 1e-15);

        assert!(folner_convergence(&w, &k, &[101]).is_err());
    }

    #[test]
    fn folner_convergence_iid_settles() {
        let w = iid_config(20_000, 0.5, 31);
        let k = Shape::interval(1).unwrap();
        let entries = folner_convergence(&w, &k, &[100, 1_000, 10_000, 20_000]).unwrap();
        // At n with n >= 10^4 the distance to final is small.
        let at_1e4 = entries.iter().find(|e| e.n == 10_000).unwrap();
        assert!(at_1e4.l1_to_final < 0.02, "dist {}", at_1e4.l1_to_final);
    }

    #[test]
    fn is_close_basics() {
        let k = Shape::interval(1).unwrap();
        let p = BlockDistribution::symbol_law(&[0.5, 0.5]).unwrap();
        let spec = ClosenessSpec::new(k.clone(), 0.1).unwrap();
        assert!(is_close(&p, &p, &spec).unwrap());

        let q = BlockDistribution::symbol_law(&[0.7, 0.3]).unwrap();
        assert!(!is_close(&p, &q, &spec).unwrap());

        let spec_loose = ClosenessSpec::new(k, 0.21).unwrap();
        assert!(is_close(&p, &q, &spec_loose).unwrap());

        let wrong = ClosenessSpec::new(Shape::interval(2).unwrap(), 0.1).unwrap();
        assert!(is_close(&p, &q, &wrong).is_err());
    }

    #[test]
    fn is_close_iid_sample_vs_source() {
        let k = Shape::interval(2).unwrap();
        let spec = ClosenessSpec::new(k.clone(), 0.05).unwrap();
        let source = BlockDistribution::from_weights(
            k.clone(),
            vec![
                (vec![0, 0], 0.25),
                (vec![0, 1], 0.25),
                (vec![1, 0], 0.25),
                (vec![1, 1], 0.25),
            ],
        )
        .unwrap();
        // 100 seeds, 10^4 cells each; failure probability is astronomically
        // small at delta = 0.05.
        for seed in 0..100 {
            let w = iid_config(10_000, 0.5, 1000 + seed);
            let emp = emp_config_normalized(&w, &k).unwrap();
            assert!(is_close(&emp, &source, &spec).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn averaged_tile_empirical_single_tile() {
        let w = iid_config(64, 0.5, 9);
        let shapes = crate::tiling::ShapeSystem::new(vec![Shape::interval(64).unwrap()]).unwrap();
        let t = TilingSample {
            shapes,
            region: w.region().clone(),
            tiles: vec![crate::tiling::Tile {
                shape_index: 1,
                center: GroupPoint::z(0),
            }],
            remainder: Shape::empty(1),
        };
        let k = Shape::interval(2).unwrap();
        let avg = averaged_tile_empirical(&w, &t, &k).unwrap();
        let global = emp_config_normalized(&w, &k).unwrap();
        assert!(avg.sup_distance(&global) < 1e-15);
    }

    #[test]
    fn averaged_tile_empirical_identical_tiles() {
        // Two tiles with identical contents: the average equals each
        // tile's own empirical measure.
        let region = Shape::interval(8).unwrap();
        let w = Configuration::new(region.clone(), vec![0, 1, 1, 0, 0, 1, 1, 0]).unwrap();
        let t = tile_z(8, &[(4, 1.0)], RemainderMode::Remainder, 0).unwrap();
        let k = Shape::interval(2).unwrap();
        let avg = averaged_tile_empirical(&w, &t, &k).unwrap();
        let single = emp_block_normalized(&w.restrict(&Shape::interval(4).unwrap(), GroupPoint::z(0)).unwrap(), &k).unwrap();
        assert!(avg.sup_distance(&single) < 1e-15);
    }

    #[test]
    fn averaged_tile_empirical_near_global() {
        let w = iid_config(100_000, 0.5, 12);
        let t = tile_z(100_000, &[(64, 1.0)], RemainderMode::Remainder, 12).unwrap();
        let k = Shape::interval(2).unwrap();
        let avg = averaged_tile_empirical(&w, &t, &k).unwrap();
        let global = emp_config_normalized(&w, &k).unwrap();
        assert!(avg.sup_distance(&global) < 0.05);

        // The exact geometric bound dominates the observed gap.
        let bound = tile_average_bound(&t, &k).unwrap();
        assert!(avg.sup_distance(&global) <= bound + 1e-12);
    }

    #[test]
    fn tile_average_bound_is_sharp_for_mixed_tilings() {
        for seed in 0..5u64 {
            let w = iid_config(5_000, 0.3, 400 + seed);
            let t = tile_z(5_000, &[(8, 1.0), (13, 1.0)], RemainderMode::Remainder, seed).unwrap();
            let k = Shape::interval(3).unwrap();
            let avg = averaged_tile_empirical(&w, &t, &k).unwrap();
            let global = emp_config_normalized(&w, &k).unwrap();
            let bound = tile_average_bound(&t, &k).unwrap();
            assert!(avg.sup_distance(&global) <= bound + 1e-12);
        }
    }

    #[test]
    fn averaged_tile_empirical_2d() {
        use crate::tiling::tile_z2;
        let region = Shape::rect(40, 40).unwrap();
        let mut rng = seeded(77);
        let values: Vec<Symbol> = (0..region.len()).map(|_| rng.gen_range(0..2)).collect();
        let w = Configuration::new(region, values).unwrap();
        let t = tile_z2(40, 40, &[((4, 4), 1.0), ((5, 4), 1.0)], 7).unwrap();
        let k = Shape::new(2, vec![GroupPoint::z2(0, 0), GroupPoint::z2(1, 0)]).unwrap();
        let avg = averaged_tile_empirical(&w, &t, &k).unwrap();
        let global = emp_config_normalized(&w, &k).unwrap();
        let bound = tile_average_bound(&t, &k).unwrap();
        assert!(avg.sup_distance(&global) <= bound + 1e-12);
        assert!(avg.is_probability());
    }

    #[test]
    fn averaged_tile_empirical_test_shape_too_large() {
        let w = iid_config(20, 0.5, 1);
        let t = tile_z(20, &[(4, 1.0)], RemainderMode::Remainder, 1).unwrap();
        let k = Shape::interval(5).unwrap();
        assert!(matches!(
            averaged_tile_empirical(&w, &t, &k),
            Err(Error::TestShapeDoesNotFit(_))
        ));
    }

    #[test]
    fn distribution_json_golden() {
        let k = Shape::interval(2).unwrap();
        let d = BlockDistribution::from_weights(
            k,
            vec![(vec![1, 0], 0.25), (vec![0, 1], 0.75)],
        )
        .unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(
            json,
            r#"{"domain":{"dim":1,"points":[0,1]},"entries":[["0,1",0.75],["1,0",0.25]]}"#
        );
        let back: BlockDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
