//! The independent-tile lift: conditional tile distributions, seeded
//! Bernoulli and per-tile sampling, the finite entropy decomposition of a
//! tiled region, the entropy-defect comparison against correlated sources,
//! and the tuple-alphabet factor map.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::empirical::BlockDistribution;
use crate::entropy::entropy_raw;
use crate::error::{Error, Result};
use crate::lattice::Shape;
use crate::rng::{substream, DiscreteSampler, SeededRng};
use crate::symbolic::{Alphabet, Configuration, Symbol};
use crate::tiling::{tiles_from_itinerary, ShapeSystem, TilingSample};

/// Per-shape conditional distributions of tile contents.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TileLaw {
    shapes: ShapeSystem,
    dists: Vec<BlockDistribution>,
}

impl TileLaw {
    pub fn new(shapes: ShapeSystem, dists: Vec<BlockDistribution>) -> Result<Self> {
        if dists.len() != shapes.len() {
            return Err(Error::ShapeMismatch);
        }
        for (i, d) in dists.iter().enumerate() {
            if d.domain() != &shapes.shapes()[i] {
                return Err(Error::ShapeMismatch);
            }
            d.ensure_probability()?;
        }
        Ok(TileLaw { shapes, dists })
    }

    pub fn shapes(&self) -> &ShapeSystem {
        &self.shapes
    }

    pub fn dists(&self) -> &[BlockDistribution] {
        &self.dists
    }

    /// Distribution for a 1-based shape index.
    pub fn dist(&self, shape_index: usize) -> &BlockDistribution {
        &self.dists[shape_index - 1]
    }
}

/// Draws block keys from one distribution's support.
struct LawSampler {
    keys: Vec<Vec<Symbol>>,
    sampler: DiscreteSampler,
}

impl LawSampler {
    fn new(dist: &BlockDistribution) -> Result<Self> {
        let keys: Vec<Vec<Symbol>> = dist.iter().map(|(k, _)| k.to_vec()).collect();
        let weights: Vec<f64> = dist.iter().map(|(_, m)| m).collect();
        let sampler = DiscreteSampler::new(&weights)
            .ok_or_else(|| Error::InvalidDistribution("unsampleable distribution".into()))?;
        Ok(LawSampler { keys, sampler })
    }

    fn draw(&self, rng: &mut SeededRng) -> &[Symbol] {
        &self.keys[self.sampler.sample(rng)]
    }
}

fn singleton_law_sampler(law: &BlockDistribution) -> Result<LawSampler> {
    if law.domain().len() != 1 {
        return Err(Error::InvalidDistribution(
            "symbol law must live on a singleton shape".into(),
        ));
    }
    law.ensure_probability()?;
    LawSampler::new(law)
}

/// I.i.d. configuration on `region` with the given symbol law.
pub fn sample_bernoulli(
    law: &BlockDistribution,
    region: &Shape,
    seed: u64,
) -> Result<Configuration> {
    let sampler = singleton_law_sampler(law)?;
    let mut rng = substream(seed, 0xbe27);
    let values: Vec<Symbol> = (0..region.len()).map(|_| sampler.draw(&mut rng)[0]).collect();
    Configuration::new(region.clone(), values)
}

/// Empirical conditional tile distributions: for each shape, the frequency
/// of tile contents among the tiles carrying that shape.
pub fn estimate_tile_law(w: &Configuration, t: &TilingSample) -> Result<TileLaw> {
    let m = t.shapes.len();
    let mut counts: Vec<HashMap<Vec<Symbol>, u64>> = vec![HashMap::new(); m];
    let mut totals = vec![0u64; m];
    for tile in &t.tiles {
        let content = w.restrict(t.shape_of(tile), tile.center)?;
        *counts[tile.shape_index - 1]
            .entry(content.values().to_vec())
            .or_insert(0) += 1;
        totals[tile.shape_index - 1] += 1;
    }
    let mut dists = Vec::with_capacity(m);
    for i in 0..m {
        if totals[i] == 0 {
            return Err(Error::ShapeNeverOccurs(i + 1));
        }
        let total = totals[i] as f64;
        dists.push(BlockDistribution::from_weights(
            t.shapes.shapes()[i].clone(),
            counts[i]
                .drain()
                .map(|(key, c)| (key, c as f64 / total)),
        )?);
    }
    TileLaw::new(t.shapes.clone(), dists)
}

/// Samples the conditional lift given the tiling: tile contents are drawn
/// i.i.d. from the per-shape distributions, remainder cells i.i.d. from
/// the symbol law. Deterministic in `(tiling, law, seed)`.
pub fn construct_lift(
    t: &TilingSample,
    law: &TileLaw,
    remainder_law: &BlockDistribution,
    seed: u64,
) -> Result<Configuration> {
    if law.shapes() != &t.shapes {
        return Err(Error::ShapeMismatch);
    }
    let samplers: Vec<LawSampler> =
        law.dists().iter().map(LawSampler::new).collect::<Result<_>>()?;
    let remainder_sampler = if t.remainder.is_empty() {
        None
    } else {
        Some(singleton_law_sampler(remainder_law)?)
    };

    let mut values = vec![0 as Symbol; t.region.len()];
    let mut rng = substream(seed, 0x11f7);
    for tile in &t.tiles {
        let key = samplers[tile.shape_index - 1].draw(&mut rng);
        let shape = t.shape_of(tile);
        for (&p, &sym) in shape.points().iter().zip(key) {
            let idx = t
                .region
                .position(p + tile.center)
                .ok_or(Error::WindowEscapesRegion)?;
            values[idx] = sym;
        }
    }
    if let Some(sampler) = remainder_sampler {
        let mut rng = substream(seed, 0x11f8);
        for &p in t.remainder.points() {
            let idx = t.region.position(p).ok_or(Error::WindowEscapesRegion)?;
            values[idx] = sampler.draw(&mut rng)[0];
        }
    }
    Configuration::new(t.region.clone(), values)
}

/// Exact entropy of the product measure the lift induces on the region:
/// one `H(D_i)` term per tile plus `|R| * H(remainder_law)`.
pub fn finite_entropy_decomposition(
    t: &TilingSample,
    law: &TileLaw,
    remainder_law: &BlockDistribution,
) -> Result<f64> {
    if law.shapes() != &t.shapes {
        return Err(Error::ShapeMismatch);
    }
    let per_shape: Vec<f64> = law
        .dists()
        .iter()
        .map(|d| d.ensure_probability().map(|_| entropy_raw(d.iter().map(|(_, m)| m))))
        .collect::<Result<_>>()?;
    let tile_term: f64 = t
        .tiles
        .iter()
        .map(|tile| per_shape[tile.shape_index - 1])
        .sum();
    let remainder_term = if t.remainder.is_empty() {
        0.0
    } else {
        remainder_law.ensure_probability()?;
        t.remainder.len() as f64 * entropy_raw(remainder_law.iter().map(|(_, m)| m))
    };
    Ok(tile_term + remainder_term)
}

/// Comparison of a (possibly cross-tile-correlated) source against the
/// maximal-entropy decomposition of its own estimated tile law.
#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    /// Plug-in entropy of the sampled full-region law, in nats.
    pub lhs_nats: f64,
    /// Tile term of the decomposition for the estimated tile law.
    pub rhs_nats: f64,
    /// `|R| * ln |alphabet|`.
    pub remainder_budget_nats: f64,
    pub region_cells: usize,
    pub sample_count: usize,
}

impl DefectReport {
    pub fn lhs_per_cell(&self) -> f64 {
        self.lhs_nats / self.region_cells as f64
    }

    pub fn rhs_per_cell(&self) -> f64 {
        self.rhs_nats / self.region_cells as f64
    }
}

/// Estimates both sides of the entropy comparison from resamples of a
/// source on the tiled region: the left side is the plug-in entropy of the
/// empirical full-region distribution, the right side the tile term of
/// [`finite_entropy_decomposition`] for the tile law pooled across the
/// samples. By concavity of entropy the contract
/// `lhs <= rhs + |R| ln |alphabet|` holds for every sample set.
pub fn entropy_defect_vs_coupled(
    samples: &[Configuration],
    t: &TilingSample,
    alphabet: Alphabet,
) -> Result<DefectReport> {
    if samples.is_empty() {
        return Err(Error::DegenerateSample("no source samples".into()));
    }
    for s in samples {
        if s.region() != &t.region {
            return Err(Error::Invalid("sample region differs from tiling region".into()));
        }
    }
    let n = samples.len() as f64;

    // BTreeMaps keep the accumulation order canonical, so the single-tile
    // case reproduces the left side bit for bit.
    let mut full_counts: std::collections::BTreeMap<&[Symbol], u64> = Default::default();
    for s in samples {
        *full_counts.entry(s.values()).or_insert(0) += 1;
    }
    let lhs = entropy_raw(full_counts.values().map(|&c| c as f64 / n));

    // Pool tile contents across samples.
    let m = t.shapes.len();
    let mut counts: Vec<std::collections::BTreeMap<Vec<Symbol>, u64>> = vec![Default::default(); m];
    let mut totals = vec![0u64; m];
    for s in samples {
        for tile in &t.tiles {
            let content = s.restrict(t.shape_of(tile), tile.center)?;
            *counts[tile.shape_index - 1]
                .entry(content.values().to_vec())
                .or_insert(0) += 1;
            totals[tile.shape_index - 1] += 1;
        }
    }
    let mut per_shape = vec![0.0; m];
    for i in 0..m {
        if totals[i] > 0 {
            per_shape[i] =
                entropy_raw(counts[i].values().map(|&c| c as f64 / totals[i] as f64));
        }
    }
    let rhs: f64 = t
        .tiles
        .iter()
        .map(|tile| per_shape[tile.shape_index - 1])
        .sum();

    Ok(DefectReport {
        lhs_nats: lhs,
        rhs_nats: rhs,
        remainder_budget_nats: t.remainder.len() as f64 * (alphabet.size() as f64).ln(),
        region_cells: t.region.len(),
        sample_count: samples.len(),
    })
}

/// A symbol of the tuple alphabet: one block value vector per shape.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TupleSymbol {
    pub components: Vec<Vec<Symbol>>,
}

/// A configuration over the tuple alphabet.
#[derive(Clone, PartialEq, Debug)]
pub struct TupleConfiguration {
    region: Shape,
    values: Vec<TupleSymbol>,
}

impl TupleConfiguration {
    pub fn new(region: Shape, values: Vec<TupleSymbol>) -> Result<Self> {
        if region.len() != values.len() {
            return Err(Error::Invalid("tuple value count differs from region".into()));
        }
        Ok(TupleConfiguration { region, values })
    }

    /// I.i.d. product draw: at every cell, an independent block per shape.
    pub fn sample_product_iid(region: &Shape, law: &TileLaw, seed: u64) -> Result<Self> {
        let samplers: Vec<LawSampler> =
            law.dists().iter().map(LawSampler::new).collect::<Result<_>>()?;
        let mut rng = substream(seed, 0x70f1);
        let values = (0..region.len())
            .map(|_| TupleSymbol {
                components: samplers.iter().map(|s| s.draw(&mut rng).to_vec()).collect(),
            })
            .collect();
        Ok(TupleConfiguration { region: region.clone(), values })
    }

    pub fn region(&self) -> &Shape {
        &self.region
    }

    pub fn value_at(&self, p: crate::lattice::GroupPoint) -> Option<&TupleSymbol> {
        self.region.position(p).map(|i| &self.values[i])
    }

    pub fn shift(&self, g: crate::lattice::GroupPoint) -> Self {
        TupleConfiguration {
            region: self.region.translate(g.neg()),
            values: self.values.clone(),
        }
    }
}

/// The tuple-alphabet factor map: at each `i`-tile center the output block
/// on that tile is the `i`-th component of the tuple symbol there;
/// remainder cells are filled i.i.d. from the symbol law.
pub fn theta_map(
    itinerary: &Configuration,
    tuple_track: &TupleConfiguration,
    shapes: &ShapeSystem,
    remainder_law: &BlockDistribution,
    seed: u64,
) -> Result<Configuration> {
    if tuple_track.region() != itinerary.region() {
        return Err(Error::Invalid("tuple track region differs from itinerary".into()));
    }
    let t = tiles_from_itinerary(itinerary, shapes)?;
    let mut values = vec![0 as Symbol; t.region.len()];
    for tile in &t.tiles {
        let tuple = tuple_track
            .value_at(tile.center)
            .expect("center is in the region");
        let component = tuple
            .components
            .get(tile.shape_index - 1)
            .ok_or(Error::ShapeMismatch)?;
        let shape = t.shape_of(tile);
        if component.len() != shape.len() {
            return Err(Error::ShapeMismatch);
        }
        for (&p, &sym) in shape.points().iter().zip(component) {
            let idx = t.region.position(p + tile.center).unwrap();
            values[idx] = sym;
        }
    }
    if !t.remainder.is_empty() {
        let sampler = singleton_law_sampler(remainder_law)?;
        let mut rng = substream(seed, 0x7e7a);
        for &p in t.remainder.points() {
            values[t.region.position(p).unwrap()] = sampler.draw(&mut rng)[0];
        }
    }
    Configuration::new(t.region.clone(), values)
}
