//! Alphabets, blocks over finite shapes, finite configurations, the shift
//! action, restriction and concatenation.
//!
//! Symbols are dense integer indices; any labeling lives in the CLI layer.
//! Values are stored in the row-major order of their domain shape, so
//! translating a domain never reorders the value vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GroupPoint, Shape};

pub type Symbol = u32;

/// A finite alphabet `{0, ..., size-1}` with `size >= 2`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if size < 2 {
            return Err(Error::AlphabetTooSmall(size));
        }
        Ok(Alphabet { size })
    }

    pub const BINARY: Alphabet = Alphabet { size: 2 };

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s < self.size
    }
}

/// A block: a total symbol assignment on a finite shape.
///
/// Equality is domain-and-values equality; use [`Block::normalize`] to
/// identify blocks over translated domains.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Block {
    domain: Shape,
    values: Vec<Symbol>,
}

impl Block {
    /// `values` must be given in the domain's row-major order.
    pub fn new(domain: Shape, values: Vec<Symbol>) -> Result<Self> {
        if domain.len() != values.len() {
            return Err(Error::Invalid(format!(
                "block has {} values for a domain of {} cells",
                values.len(),
                domain.len()
            )));
        }
        Ok(Block { domain, values })
    }

    pub fn constant(domain: Shape, symbol: Symbol) -> Self {
        let values = vec![symbol; domain.len()];
        Block { domain, values }
    }

    pub fn domain(&self) -> &Shape {
        &self.domain
    }

    pub fn values(&self) -> &[Symbol] {
        &self.values
    }

    pub fn value_at(&self, p: GroupPoint) -> Option<Symbol> {
        self.domain.position(p).map(|i| self.values[i])
    }

    /// Translates the domain so its row-major minimal point is the origin.
    /// Idempotent; the value vector is unchanged because translation
    /// preserves row-major order.
    pub fn normalize(&self) -> Block {
        match self.domain.min_point() {
            None | Some(GroupPoint { x: 0, y: 0 }) => self.clone(),
            Some(min) => Block {
                domain: self.domain.translate(min.neg()),
                values: self.values.clone(),
            },
        }
    }

    /// The block viewed as a configuration on its own domain.
    pub fn into_configuration(self) -> Configuration {
        Configuration { region: self.domain, values: self.values }
    }
}

/// Concatenation of blocks over pairwise disjoint domains.
pub fn concatenate(blocks: &[Block]) -> Result<Block> {
    let total: usize = blocks.iter().map(|b| b.domain.len()).sum();
    let dim = blocks.iter().map(|b| b.domain.dim()).max().unwrap_or(1);
    let mut cells: Vec<(GroupPoint, Symbol)> = Vec::with_capacity(total);
    for b in blocks {
        for (i, &p) in b.domain.points().iter().enumerate() {
            cells.push((p, b.values[i]));
        }
    }
    cells.sort_unstable_by_key(|&(p, _)| p);
    if cells.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::DomainsNotDisjoint);
    }
    let domain = Shape::new(dim, cells.iter().map(|&(p, _)| p).collect())?;
    let values = cells.into_iter().map(|(_, s)| s).collect();
    Ok(Block { domain, values })
}

/// A finite configuration: a total symbol assignment on a region
/// (typically a Folner box). The desk-scale stand-in for a point of the
/// full shift space.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Configuration {
    region: Shape,
    values: Vec<Symbol>,
}

impl Configuration {
    /// `values` must be given in the region's row-major order.
    pub fn new(region: Shape, values: Vec<Symbol>) -> Result<Self> {
        if region.len() != values.len() {
            return Err(Error::Invalid(format!(
                "configuration has {} values for a region of {} cells",
                values.len(),
                region.len()
            )));
        }
        Ok(Configuration { region, values })
    }

    pub fn constant(region: Shape, symbol: Symbol) -> Self {
        let values = vec![symbol; region.len()];
        Configuration { region, values }
    }

    pub fn region(&self) -> &Shape {
        &self.region
    }

    pub fn values(&self) -> &[Symbol] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Symbol] {
        &mut self.values
    }

    pub fn value_at(&self, p: GroupPoint) -> Option<Symbol> {
        self.region.position(p).map(|i| self.values[i])
    }

    /// The shift action: `shift(w, g)` has value at `h` equal to `w` at
    /// `h + g`, so the region moves to `region - g`.
    pub fn shift(&self, g: GroupPoint) -> Configuration {
        Configuration {
            region: self.region.translate(g.neg()),
            values: self.values.clone(),
        }
    }

    /// Restriction `w|_{K+g}` normalized to domain `K`: the block over `K`
    /// with values `h -> w_{h+g}`.
    pub fn restrict(&self, k: &Shape, g: GroupPoint) -> Result<Block> {
        let mut values = Vec::with_capacity(k.len());
        for &h in k.points() {
            match self.region.position(h + g) {
                Some(i) => values.push(self.values[i]),
                None => return Err(Error::WindowEscapesRegion),
            }
        }
        Ok(Block { domain: k.clone(), values })
    }

    /// The whole configuration as a block on its region.
    pub fn as_block(&self) -> Block {
        Block { domain: self.region.clone(), values: self.values.clone() }
    }

    /// Largest symbol present plus one (minimum 2); a convenient alphabet
    /// bound when none was recorded.
    pub fn inferred_alphabet(&self) -> Alphabet {
        let max = self.values.iter().copied().max().unwrap_or(0);
        Alphabet { size: (max + 1).max(2) }
    }
}

const BINARY_MAGIC: &[u8; 4] = b"SLC1";

impl Configuration {
    /// Compact binary form: magic, dim, region descriptor, row-major u8
    /// symbols. Only alphabets of size <= 256 are representable.
    pub fn to_binary(&self) -> Result<Vec<u8>> {
        if self.values.iter().any(|&s| s > 255) {
            return Err(Error::Invalid(
                "binary configuration format requires symbols < 256".into(),
            ));
        }
        let mut out = Vec::with_capacity(self.values.len() + 64);
        out.extend_from_slice(BINARY_MAGIC);
        out.push(self.region.dim() as u8);
        let pts = self.region.points();
        out.extend_from_slice(&(pts.len() as u64).to_le_bytes());
        for p in pts {
            out.extend_from_slice(&p.x.to_le_bytes());
            if self.region.dim() == 2 {
                out.extend_from_slice(&p.y.to_le_bytes());
            }
        }
        out.extend(self.values.iter().map(|&s| s as u8));
        Ok(out)
    }

    pub fn from_binary(data: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("binary configuration: {m}"));
        if data.len() < 13 || &data[0..4] != BINARY_MAGIC {
            return Err(bad("bad header"));
        }
        let dim = data[4] as usize;
        let n = u64::from_le_bytes(data[5..13].try_into().unwrap()) as usize;
        let coord_bytes = if dim == 2 { 16 } else { 8 };
        let values_at = 13 + n * coord_bytes;
        if data.len() != values_at + n {
            return Err(bad("length mismatch"));
        }
        let mut points = Vec::with_capacity(n);
        let mut off = 13;
        for _ in 0..n {
            let x = i64::from_le_bytes(data[off..off + 8].try_into().unwrap());
            off += 8;
            let y = if dim == 2 {
                let y = i64::from_le_bytes(data[off..off + 8].try_into().unwrap());
                off += 8;
                y
            } else {
                0
            };
            points.push(GroupPoint { x, y });
        }
        let region = Shape::new(dim, points)?;
        if region.len() != n {
            return Err(bad("region points not distinct"));
        }
        let values = data[values_at..].iter().map(|&b| b as Symbol).collect();
        Configuration::new(region, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zconfig(values: &[Symbol]) -> Configuration {
        let region = Shape::interval(values.len() as i64).unwrap();
        Configuration::new(region, values.to_vec()).unwrap()
    }

    #[test]
    fn alphabet_size_bounds() {
        assert!(Alphabet::new(1).is_err());
        assert_eq!(Alphabet::new(5).unwrap().size(), 5);
    }

    #[test]
    fn shift_examples() {
        let w = zconfig(&[10, 11, 12]);
        assert_eq!(w.shift(GroupPoint::z(0)), w);

        let s = w.shift(GroupPoint::z(1));
        assert_eq!(s.value_at(GroupPoint::z(-1)), Some(10));
        assert_eq!(s.value_at(GroupPoint::z(0)), Some(11));
        assert_eq!(s.value_at(GroupPoint::z(1)), Some(12));
        assert_eq!(s.shift(GroupPoint::z(-1)), w);
    }

    #[test]
    fn shift_composes_as_group_action() {
        let w = zconfig(&[0, 1, 2, 3, 4]);
        let g = GroupPoint::z(2);
        let h = GroupPoint::z(-1);
        assert_eq!(w.shift(g + h), w.shift(h).shift(g));
    }

    #[test]
    fn restrict_examples() {
        let w = zconfig(&[0, 1, 2, 3]);
        let k = Shape::interval(2).unwrap();
        let b = w.restrict(&k, GroupPoint::z(1)).unwrap();
        assert_eq!(b.values(), &[1, 2]);

        // K = region, g = 0: the whole configuration.
        let whole = w.restrict(w.region(), GroupPoint::z(0)).unwrap();
        assert_eq!(whole.values(), w.values());

        // Escaping window.
        assert!(matches!(
            w.restrict(&k, GroupPoint::z(3)),
            Err(Error::WindowEscapesRegion)
        ));
    }

    #[test]
    fn restrict_2d() {
        // 3x3 configuration, row-major values 0..9.
        let region = Shape::rect(3, 3).unwrap();
        let w = Configuration::new(region, (0..9).collect()).unwrap();
        let k = Shape::new(2, vec![GroupPoint::z2(0, 0), GroupPoint::z2(1, 0)]).unwrap();
        let b = w.restrict(&k, GroupPoint::z2(1, 1)).unwrap();
        // cells (1,1) and (2,1): row-major indices 4 and 5
        assert_eq!(b.values(), &[4, 5]);
    }

    #[test]
    fn restrict_shift_identity() {
        let w = zconfig(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let k = Shape::interval(3).unwrap();
        let g = GroupPoint::z(2);
        for h in 0..3 {
            let h = GroupPoint::z(h);
            assert_eq!(
                w.shift(g).restrict(&k, h).unwrap(),
                w.restrict(&k, h + g).unwrap()
            );
        }
    }

    #[test]
    fn normalize_examples() {
        let domain = Shape::new(1, vec![GroupPoint::z(3), GroupPoint::z(4)]).unwrap();
        let b = Block::new(domain, vec![7, 8]).unwrap();
        let n = b.normalize();
        assert_eq!(n.domain(), &Shape::interval(2).unwrap());
        assert_eq!(n.values(), &[7, 8]);
        assert_eq!(n.normalize(), n);

        let already = Block::new(Shape::interval(2).unwrap(), vec![1, 2]).unwrap();
        assert_eq!(already.normalize(), already);
    }

    #[test]
    fn concatenate_examples() {
        let a = Block::new(Shape::new(1, vec![GroupPoint::z(0)]).unwrap(), vec![1]).unwrap();
        let b = Block::new(Shape::new(1, vec![GroupPoint::z(1)]).unwrap(), vec![2]).unwrap();
        let c = concatenate(&[a.clone(), b]).unwrap();
        assert_eq!(c.domain(), &Shape::interval(2).unwrap());
        assert_eq!(c.values(), &[1, 2]);

        assert_eq!(concatenate(&[a.clone()]).unwrap(), a);

        let overlapping =
            Block::new(Shape::new(1, vec![GroupPoint::z(0)]).unwrap(), vec![9]).unwrap();
        assert!(matches!(
            concatenate(&[a, overlapping]),
            Err(Error::DomainsNotDisjoint)
        ));
    }

    #[test]
    fn binary_round_trip() {
        let w = zconfig(&[0, 1, 1, 0, 1]);
        let bytes = w.to_binary().unwrap();
        assert_eq!(Configuration::from_binary(&bytes).unwrap(), w);

        let region = Shape::rect(3, 2).unwrap();
        let w2 = Configuration::new(region, vec![0, 1, 2, 3, 4, 5]).unwrap();
        let bytes = w2.to_binary().unwrap();
        assert_eq!(Configuration::from_binary(&bytes).unwrap(), w2);

        let big = Configuration::new(Shape::interval(1).unwrap(), vec![300]).unwrap();
        assert!(big.to_binary().is_err());
    }
}
