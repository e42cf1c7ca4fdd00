//! Exact tilings of finite regions by translates of finitely many shapes:
//! validation, itineraries, and seeded renewal/band generators for Z and Z^2.
//!
//! Every tile shape contains the origin; a tile is the translate of its
//! shape by its center. The cells of the region not covered by a complete
//! tile form the boundary remainder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GroupPoint, Shape};
use crate::rng::{substream, DiscreteSampler};
use crate::symbolic::{Configuration, Symbol};

/// The finitely many tile shapes `S_1, ..., S_m`, each containing the origin.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ShapeSystem {
    shapes: Vec<Shape>,
}

impl ShapeSystem {
    pub fn new(shapes: Vec<Shape>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::Invalid("shape system needs at least one shape".into()));
        }
        let dim = shapes[0].dim();
        for (i, s) in shapes.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::DimMismatch(dim, s.dim()));
            }
            if !s.contains(GroupPoint::ORIGIN) {
                return Err(Error::Invalid(format!(
                    "shape {} does not contain the origin",
                    i + 1
                )));
            }
        }
        Ok(ShapeSystem { shapes })
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    /// Shape for a 1-based index.
    pub fn shape(&self, index: usize) -> Option<&Shape> {
        (1..=self.shapes.len())
            .contains(&index)
            .then(|| &self.shapes[index - 1])
    }

    pub fn dim(&self) -> usize {
        self.shapes[0].dim()
    }
}

/// One tile: a 1-based shape index and the translation applied to it.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Tile {
    pub shape_index: usize,
    pub center: GroupPoint,
}

/// An exact cover of a finite region by tiles plus a boundary remainder.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TilingSample {
    pub shapes: ShapeSystem,
    pub region: Shape,
    pub tiles: Vec<Tile>,
    pub remainder: Shape,
}

/// A diagnosed defect of a claimed tiling.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    BadShapeIndex { tile: usize, index: usize },
    OutOfRegion { tile: usize, cell: GroupPoint },
    Overlap { cell: GroupPoint },
    RemainderOverlap { cell: GroupPoint },
    Uncovered { cell: GroupPoint },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BadShapeIndex { tile, index } => {
                write!(f, "tile {tile} has shape index {index} outside the system")
            }
            Violation::OutOfRegion { tile, cell } => {
                write!(f, "tile {tile} covers cell {cell:?} outside the region")
            }
            Violation::Overlap { cell } => write!(f, "cell {cell:?} covered twice"),
            Violation::RemainderOverlap { cell } => {
                write!(f, "remainder cell {cell:?} also covered by a tile")
            }
            Violation::Uncovered { cell } => {
                write!(f, "cell {cell:?} neither covered nor in the remainder")
            }
        }
    }
}

impl TilingSample {
    pub fn shape_of(&self, tile: &Tile) -> &Shape {
        &self.shapes.shapes()[tile.shape_index - 1]
    }

    /// Cells of the region covered by complete tiles.
    pub fn tiled_cell_count(&self) -> usize {
        self.tiles
            .iter()
            .map(|t| self.shape_of(t).len())
            .sum()
    }

    /// Checks disjointness and exact cover; an empty list means the sample
    /// is a valid tiling.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        // 0 = untouched, 1 = tiled, 2 = remainder
        let mut owner = vec![0u8; self.region.len()];
        for (ti, tile) in self.tiles.iter().enumerate() {
            let shape = match self.shapes.shape(tile.shape_index) {
                Some(s) => s,
                None => {
                    violations.push(Violation::BadShapeIndex {
                        tile: ti,
                        index: tile.shape_index,
                    });
                    continue;
                }
            };
            for &p in shape.points() {
                let cell = p + tile.center;
                match self.region.position(cell) {
                    None => violations.push(Violation::OutOfRegion { tile: ti, cell }),
                    Some(idx) => {
                        if owner[idx] != 0 {
                            violations.push(Violation::Overlap { cell });
                        } else {
                            owner[idx] = 1;
                        }
                    }
                }
            }
        }
        for &p in self.remainder.points() {
            match self.region.position(p) {
                None => violations.push(Violation::Uncovered { cell: p }),
                Some(idx) => {
                    if owner[idx] != 0 {
                        violations.push(Violation::RemainderOverlap { cell: p });
                    } else {
                        owner[idx] = 2;
                    }
                }
            }
        }
        for (idx, &o) in owner.iter().enumerate() {
            if o == 0 {
                violations.push(Violation::Uncovered {
                    cell: self.region.points()[idx],
                });
            }
        }
        violations
    }

    fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidTiling(
                violations.len(),
                violations[0].to_string(),
            ))
        }
    }

    /// The itinerary: shape index at tile centers, 0 elsewhere.
    pub fn itinerary(&self) -> Result<Configuration> {
        self.ensure_valid()?;
        let mut values = vec![0 as Symbol; self.region.len()];
        for tile in &self.tiles {
            let idx = self
                .region
                .position(tile.center)
                .expect("validated tiling has centers in region");
            values[idx] = tile.shape_index as Symbol;
        }
        Configuration::new(self.region.clone(), values)
    }
}

/// Inverse of [`TilingSample::itinerary`]: reads tile centers off a
/// configuration over the alphabet `{0, ..., m}` and validates the
/// resulting cover.
pub fn tiles_from_itinerary(
    itinerary: &Configuration,
    shapes: &ShapeSystem,
) -> Result<TilingSample> {
    let m = shapes.len() as Symbol;
    let mut tiles = Vec::new();
    let mut covered: Vec<GroupPoint> = Vec::new();
    for (idx, &v) in itinerary.values().iter().enumerate() {
        if v == 0 {
            continue;
        }
        if v > m {
            return Err(Error::Invalid(format!(
                "itinerary symbol {v} exceeds the number of shapes {m}"
            )));
        }
        let center = itinerary.region().points()[idx];
        let shape = shapes.shape(v as usize).unwrap();
        covered.extend(shape.points().iter().map(|&p| p + center));
        tiles.push(Tile { shape_index: v as usize, center });
    }
    let covered = Shape::new(itinerary.region().dim(), covered)?;
    let remainder = itinerary.region().difference(&covered);
    let sample = TilingSample {
        shapes: shapes.clone(),
        region: itinerary.region().clone(),
        tiles,
        remainder,
    };
    sample.ensure_valid()?;
    Ok(sample)
}

/// What to do with the partial window at the end of a region.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemainderMode {
    /// The final partial interval becomes its own, shorter tile (Z only).
    ShrinkLast,
    /// Uncovered cells go to the boundary remainder.
    Remainder,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidDistribution("total weight is zero".into()));
    }
    Ok(())
}

/// Greedy left-to-right renewal tiling of the interval `[0, region_len)`
/// with i.i.d. tile lengths.
pub fn tile_z(
    region_len: i64,
    lengths: &[(i64, f64)],
    mode: RemainderMode,
    seed: u64,
) -> Result<TilingSample> {
    if lengths.iter().any(|&(len, _)| len < 1) {
        return Err(Error::InvalidDistribution("tile length < 1".into()));
    }
    let weights: Vec<f64> = lengths.iter().map(|&(_, w)| w).collect();
    check_weights(&weights)?;
    let max_len = lengths.iter().map(|&(len, _)| len).max().unwrap();
    if region_len < max_len {
        return Err(Error::Invalid(format!(
            "region length {region_len} shorter than the longest tile {max_len}"
        )));
    }

    let mut shapes: Vec<Shape> = Vec::new();
    let index_of_len = |shapes: &mut Vec<Shape>, len: i64| -> usize {
        if let Some(i) = shapes.iter().position(|s| s.len() as i64 == len) {
            i + 1
        } else {
            shapes.push(Shape::interval(len).unwrap());
            shapes.len()
        }
    };
    for &(len, _) in lengths {
        index_of_len(&mut shapes, len);
    }

    let sampler = DiscreteSampler::new(&weights).unwrap();
    let mut rng = substream(seed, 0x7a31);
    let mut tiles = Vec::new();
    let mut pos = 0i64;
    loop {
        let len = lengths[sampler.sample(&mut rng)].0;
        if pos + len > region_len {
            break;
        }
        tiles.push(Tile {
            shape_index: index_of_len(&mut shapes, len),
            center: GroupPoint::z(pos),
        });
        pos += len;
    }
    let mut remainder = Shape::empty(1);
    if pos < region_len {
        let tail = region_len - pos;
        match mode {
            RemainderMode::ShrinkLast => {
                tiles.push(Tile {
                    shape_index: index_of_len(&mut shapes, tail),
                    center: GroupPoint::z(pos),
                });
            }
            RemainderMode::Remainder => {
                remainder = Shape::new(1, (pos..region_len).map(GroupPoint::z).collect())?;
            }
        }
    }
    Ok(TilingSample {
        shapes: ShapeSystem::new(shapes)?,
        region: Shape::interval(region_len)?,
        tiles,
        remainder,
    })
}

/// Row-band tiling of a `w x h` box: bands of sampled heights, each band
/// tiled left to right with widths sampled among the rectangles of that
/// height. Partial windows go to the remainder.
pub fn tile_z2(
    region_w: i64,
    region_h: i64,
    rects: &[((i64, i64), f64)],
    seed: u64,
) -> Result<TilingSample> {
    if rects.iter().any(|&((w, h), _)| w < 1 || h < 1) {
        return Err(Error::InvalidDistribution("rectangle side < 1".into()));
    }
    let weights: Vec<f64> = rects.iter().map(|&(_, w)| w).collect();
    check_weights(&weights)?;
    for &((w, h), _) in rects {
        if w > region_w || h > region_h {
            return Err(Error::Invalid(format!(
                "rectangle {w}x{h} does not fit in the {region_w}x{region_h} region"
            )));
        }
    }

    let shapes: Vec<Shape> = {
        let mut seen: Vec<(i64, i64)> = Vec::new();
        for &(dims, _) in rects {
            if !seen.contains(&dims) {
                seen.push(dims);
            }
        }
        seen.iter().map(|&(w, h)| Shape::rect(w, h).unwrap()).collect()
    };
    let shape_index = |w: i64, h: i64| -> usize {
        shapes
            .iter()
            .position(|s| s.box_dims().map(|(_, bw, bh)| (bw, bh)) == Some((w, h)))
            .unwrap()
            + 1
    };

    // Band heights follow the height marginal; widths within a band follow
    // the conditional distribution of widths given that height.
    let mut heights: Vec<(i64, f64)> = Vec::new();
    for &((_, h), wt) in rects {
        match heights.iter_mut().find(|(hh, _)| *hh == h) {
            Some((_, acc)) => *acc += wt,
            None => heights.push((h, wt)),
        }
    }
    let height_sampler =
        DiscreteSampler::new(&heights.iter().map(|&(_, w)| w).collect::<Vec<_>>()).unwrap();

    let mut rng = substream(seed, 0x7a32);
    let mut tiles = Vec::new();
    let mut remainder_cells: Vec<GroupPoint> = Vec::new();
    let mut y = 0i64;
    while y < region_h {
        let band_h = heights[height_sampler.sample(&mut rng)].0;
        if y + band_h > region_h {
            for yy in y..region_h {
                remainder_cells.extend((0..region_w).map(|x| GroupPoint::z2(x, yy)));
            }
            break;
        }
        let band_widths: Vec<(i64, f64)> = rects
            .iter()
            .filter(|&&((_, h), _)| h == band_h)
            .map(|&((w, _), wt)| (w, wt))
            .collect();
        let width_sampler =
            DiscreteSampler::new(&band_widths.iter().map(|&(_, w)| w).collect::<Vec<_>>())
                .unwrap();
        let mut x = 0i64;
        while x < region_w {
            let tile_w = band_widths[width_sampler.sample(&mut rng)].0;
            if x + tile_w > region_w {
                for yy in y..y + band_h {
                    remainder_cells.extend((x..region_w).map(|xx| GroupPoint::z2(xx, yy)));
                }
                break;
            }
            tiles.push(Tile {
                shape_index: shape_index(tile_w, band_h),
                center: GroupPoint::z2(x, y),
            });
            x += tile_w;
        }
        y += band_h;
    }

    Ok(TilingSample {
        shapes: ShapeSystem::new(shapes)?,
        region: Shape::rect(region_w, region_h)?,
        tiles,
        remainder: Shape::new(2, remainder_cells)?,
    })
}
