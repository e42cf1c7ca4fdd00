//! Group geometry for the lattices Z and Z^2: points, finite shapes,
//! translation, Minkowski products, Folner boxes and invariance defects.
//!
//! Points are stored as pairs `(x, y)`; the one-dimensional lattice is the
//! sublattice `y = 0`. Shapes keep their points sorted row-major (by `y`,
//! then `x`), which fixes the iteration order used everywhere else in the
//! crate (value layout of configurations, block keys, serialization).

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A lattice point. For `dim == 1` shapes the `y` coordinate is always 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GroupPoint {
    pub x: i64,
    pub y: i64,
}

impl GroupPoint {
    pub const ORIGIN: GroupPoint = GroupPoint { x: 0, y: 0 };

    /// Point of Z.
    pub fn z(x: i64) -> Self {
        GroupPoint { x, y: 0 }
    }

    /// Point of Z^2.
    pub fn z2(x: i64, y: i64) -> Self {
        GroupPoint { x, y }
    }

    pub fn neg(self) -> Self {
        -self
    }
}

impl std::ops::Neg for GroupPoint {
    type Output = GroupPoint;
    fn neg(self) -> GroupPoint {
        GroupPoint { x: -self.x, y: -self.y }
    }
}

impl std::ops::Add for GroupPoint {
    type Output = GroupPoint;
    fn add(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint { x: self.x + rhs.x, y: self.y + rhs.y }
    }
}

impl std::ops::Sub for GroupPoint {
    type Output = GroupPoint;
    fn sub(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint { x: self.x - rhs.x, y: self.y - rhs.y }
    }
}

/// Row-major order: by `y`, then by `x`.
impl Ord for GroupPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for GroupPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

// Points serialize as `[x, y]` pairs.
impl Serialize for GroupPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[i64; 2]>::deserialize(deserializer)?;
        Ok(GroupPoint { x, y })
    }
}

/// A finite subset of the lattice, deduplicated and sorted row-major.
///
/// The empty shape is allowed (tile remainders can be empty); operations
/// that require nonemptiness check for it explicitly.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Shape {
    dim: usize,
    points: Vec<GroupPoint>,
    // (origin, w, h) when the points fill their bounding box exactly;
    // gives O(1) membership for the common box-region case.
    box_info: Option<(GroupPoint, i64, i64)>,
}

fn detect_box(points: &[GroupPoint]) -> Option<(GroupPoint, i64, i64)> {
    let first = *points.first()?;
    let last = *points.last()?;
    let (mut min, mut max) = (first, first);
    min.x = points.iter().map(|p| p.x).min()?;
    max.x = points.iter().map(|p| p.x).max()?;
    min.y = first.y;
    max.y = last.y;
    let w = max.x - min.x + 1;
    let h = max.y - min.y + 1;
    if (points.len() as i64) == w * h {
        Some((min, w, h))
    } else {
        None
    }
}

impl Shape {
    fn from_sorted(dim: usize, points: Vec<GroupPoint>) -> Self {
        let box_info = detect_box(&points);
        Shape { dim, points, box_info }
    }

    /// Builds a shape from arbitrary points: sorts, deduplicates, checks
    /// the dimension constraint.
    pub fn new(dim: usize, mut points: Vec<GroupPoint>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::DimMismatch(dim, 2));
        }
        if dim == 1 && points.iter().any(|p| p.y != 0) {
            return Err(Error::Invalid(
                "dim-1 shape contains a point with nonzero y".into(),
            ));
        }
        points.sort_unstable();
        points.dedup();
        Ok(Shape::from_sorted(dim, points))
    }

    pub fn empty(dim: usize) -> Self {
        Shape { dim, points: Vec::new(), box_info: None }
    }

    /// Interval `{0, 1, ..., len-1}` on Z.
    pub fn interval(len: i64) -> Result<Self> {
        if len < 1 {
            return Err(Error::InvalidBoxSide(len));
        }
        Ok(Shape::from_sorted(1, (0..len).map(GroupPoint::z).collect()))
    }

    /// Axis-aligned rectangle `[0,w) x [0,h)` on Z^2.
    pub fn rect(w: i64, h: i64) -> Result<Self> {
        if w < 1 {
            return Err(Error::InvalidBoxSide(w));
        }
        if h < 1 {
            return Err(Error::InvalidBoxSide(h));
        }
        let mut points = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                points.push(GroupPoint::z2(x, y));
            }
        }
        Ok(Shape::from_sorted(2, points))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in row-major order.
    pub fn points(&self) -> &[GroupPoint] {
        &self.points
    }

    pub fn contains(&self, p: GroupPoint) -> bool {
        self.position(p).is_some()
    }

    /// Index of `p` in row-major order, if present. O(1) for box shapes.
    pub fn position(&self, p: GroupPoint) -> Option<usize> {
        if let Some((origin, w, h)) = self.box_info {
            let dx = p.x - origin.x;
            let dy = p.y - origin.y;
            if dx < 0 || dx >= w || dy < 0 || dy >= h {
                return None;
            }
            return Some((dy * w + dx) as usize);
        }
        self.points.binary_search(&p).ok()
    }

    pub fn is_subset_of(&self, other: &Shape) -> bool {
        self.points.iter().all(|&p| other.contains(p))
    }

    /// `{f + g : f in self}`. Translation preserves cardinality and order.
    pub fn translate(&self, g: GroupPoint) -> Shape {
        debug_assert!(
            self.dim == 2 || g.y == 0,
            "translating a dim-1 shape by a point off the line"
        );
        Shape {
            dim: self.dim,
            points: self.points.iter().map(|&p| p + g).collect(),
            box_info: self.box_info.map(|(o, w, h)| (o + g, w, h)),
        }
    }

    /// Minkowski sum `{k + f : k in K, f in F}` as a set.
    pub fn minkowski(&self, other: &Shape) -> Result<Shape> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        let mut points = Vec::with_capacity(self.points.len() * other.points.len());
        for &k in &self.points {
            for &f in &other.points {
                points.push(k + f);
            }
        }
        points.sort_unstable();
        points.dedup();
        Ok(Shape::from_sorted(self.dim, points))
    }

    /// Number of points in the symmetric difference with `other`.
    pub fn symmetric_difference_len(&self, other: &Shape) -> usize {
        let mut count = 0;
        let (mut i, mut j) = (0, 0);
        while i < self.points.len() && j < other.points.len() {
            match self.points[i].cmp(&other.points[j]) {
                std::cmp::Ordering::Less => {
                    count += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    count += 1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        count + (self.points.len() - i) + (other.points.len() - j)
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &Shape) -> Shape {
        Shape::from_sorted(
            self.dim,
            self.points
                .iter()
                .copied()
                .filter(|&p| !other.contains(p))
                .collect(),
        )
    }

    /// `(origin, w, h)` when the shape is exactly an axis-aligned box.
    pub fn box_dims(&self) -> Option<(GroupPoint, i64, i64)> {
        self.box_info
    }

    /// Smallest `(min, max)` corner pair covering the shape, if nonempty.
    pub fn bounding_box(&self) -> Option<(GroupPoint, GroupPoint)> {
        if self.points.is_empty() {
            return None;
        }
        let mut min = self.points[0];
        let mut max = self.points[0];
        for &p in &self.points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Some((min, max))
    }

    /// Largest extent of the bounding box along any axis.
    pub fn diameter(&self) -> i64 {
        match self.bounding_box() {
            None => 0,
            Some((min, max)) => (max.x - min.x + 1).max(max.y - min.y + 1),
        }
    }

    /// The row-major minimal point (first in iteration order).
    pub fn min_point(&self) -> Option<GroupPoint> {
        self.points.first().copied()
    }

    /// `|KF triangle F| / |F|`. `F` is `(K, gamma)`-invariant iff the
    /// returned defect is `< gamma`.
    pub fn invariance_defect(&self, k: &Shape) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyShape);
        }
        let kf = k.minkowski(self)?;
        Ok(kf.symmetric_difference_len(self) as f64 / self.len() as f64)
    }
}

/// Folner box `[0, n)^d`.
pub fn folner_box(dim: usize, n: i64) -> Result<Shape> {
    if n < 1 {
        return Err(Error::InvalidBoxSide(n));
    }
    match dim {
        1 => Shape::interval(n),
        2 => Shape::rect(n, n),
        d => Err(Error::DimMismatch(d, 2)),
    }
}

// Shapes serialize as `{dim, points}` with points as plain integers in
// dimension 1 and `[x, y]` pairs in dimension 2, sorted row-major.
impl Serialize for Shape {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Shape", 2)?;
        st.serialize_field("dim", &self.dim)?;
        if self.dim == 1 {
            let xs: Vec<i64> = self.points.iter().map(|p| p.x).collect();
            st.serialize_field("points", &xs)?;
        } else {
            let ps: Vec<[i64; 2]> = self.points.iter().map(|p| [p.x, p.y]).collect();
            st.serialize_field("points", &ps)?;
        }
        st.end()
    }
}

#[derive(Deserialize)]
struct ShapeRepr {
    dim: usize,
    points: serde_json::Value,
}

impl<'de> Deserialize<'de> for Shape {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ShapeRepr::deserialize(deserializer)?;
        let points = match repr.dim {
            1 => {
                let xs: Vec<i64> =
                    serde_json::from_value(repr.points).map_err(D::Error::custom)?;
                xs.into_iter().map(GroupPoint::z).collect()
            }
            2 => {
                let ps: Vec<[i64; 2]> =
                    serde_json::from_value(repr.points).map_err(D::Error::custom)?;
                ps.into_iter().map(|[x, y]| GroupPoint::z2(x, y)).collect()
            }
            d => return Err(D::Error::custom(format!("bad shape dim {d}"))),
        };
        Shape::new(repr.dim, points).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zshape(xs: &[i64]) -> Shape {
        Shape::new(1, xs.iter().copied().map(GroupPoint::z).collect()).unwrap()
    }

    #[test]
    fn translate_identity_and_shift() {
        let f = zshape(&[0, 1]);
        assert_eq!(f.translate(GroupPoint::z(0)), f);
        assert_eq!(f.translate(GroupPoint::z(3)), zshape(&[3, 4]));
    }

    #[test]
    fn translate_z2() {
        let f = Shape::new(2, vec![GroupPoint::z2(0, 0), GroupPoint::z2(1, 0)]).unwrap();
        let t = f.translate(GroupPoint::z2(0, 2));
        assert_eq!(
            t.points(),
            &[GroupPoint::z2(0, 2), GroupPoint::z2(1, 2)]
        );
    }

    #[test]
    fn translate_preserves_cardinality() {
        let f = zshape(&[0, 2, 5, 9]);
        for g in [-7, 0, 3, 1 << 40] {
            assert_eq!(f.translate(GroupPoint::z(g)).len(), f.len());
        }
    }

    #[test]
    fn minkowski_examples() {
        let singleton = zshape(&[0]);
        let f = zshape(&[0, 1, 2]);
        assert_eq!(singleton.minkowski(&f).unwrap(), f);

        let k = zshape(&[-1, 0, 1]);
        assert_eq!(k.minkowski(&f).unwrap(), zshape(&[-1, 0, 1, 2, 3]));

        let k2 = Shape::new(2, vec![GroupPoint::z2(0, 0), GroupPoint::z2(1, 0)]).unwrap();
        let f2 = Shape::new(2, vec![GroupPoint::z2(0, 0)]).unwrap();
        assert_eq!(k2.minkowski(&f2).unwrap(), k2);
    }

    #[test]
    fn minkowski_dim_mismatch() {
        let k = zshape(&[0]);
        let f = Shape::rect(2, 2).unwrap();
        assert!(matches!(k.minkowski(&f), Err(Error::DimMismatch(1, 2))));
    }

    #[test]
    fn invariance_defect_examples() {
        // K = {0}: KF = F, defect 0.
        let f = zshape(&[0, 1, 2, 3, 4]);
        assert_eq!(f.invariance_defect(&zshape(&[0])).unwrap(), 0.0);

        // K = {-1,0,1}, F = {0..n-1}: symmetric difference {-1, n}.
        let k = zshape(&[-1, 0, 1]);
        for n in [3i64, 10, 64] {
            let f = Shape::interval(n).unwrap();
            assert_eq!(f.invariance_defect(&k).unwrap(), 2.0 / n as f64);
        }

        // K = cross, F = n x n box: boundary count 4n.
        let cross = Shape::new(
            2,
            vec![
                GroupPoint::z2(0, 0),
                GroupPoint::z2(1, 0),
                GroupPoint::z2(-1, 0),
                GroupPoint::z2(0, 1),
                GroupPoint::z2(0, -1),
            ],
        )
        .unwrap();
        for n in [2i64, 5, 16] {
            let f = folner_box(2, n).unwrap();
            assert_eq!(f.invariance_defect(&cross).unwrap(), 4.0 / n as f64);
        }
    }

    #[test]
    fn invariance_defect_empty_shape() {
        let e = Shape::empty(1);
        assert!(matches!(
            e.invariance_defect(&zshape(&[0])),
            Err(Error::EmptyShape)
        ));
    }

    #[test]
    fn folner_box_examples() {
        assert_eq!(folner_box(1, 3).unwrap(), zshape(&[0, 1, 2]));
        assert_eq!(folner_box(1, 1).unwrap(), zshape(&[0]));
        let b = folner_box(2, 2).unwrap();
        assert_eq!(
            b.points(),
            &[
                GroupPoint::z2(0, 0),
                GroupPoint::z2(1, 0),
                GroupPoint::z2(0, 1),
                GroupPoint::z2(1, 1),
            ]
        );
        assert!(folner_box(1, 0).is_err());
        assert!(folner_box(2, -3).is_err());
    }

    #[test]
    fn folner_defect_decreases_on_doubling() {
        let k = zshape(&[-2, -1, 0, 1, 2]);
        let mut prev = f64::INFINITY;
        for n in [4i64, 8, 16, 32, 64] {
            let d = folner_box(1, n).unwrap().invariance_defect(&k).unwrap();
            assert!(d < prev, "defect not strictly decreasing at n={n}");
            prev = d;
        }
        assert!(prev < 0.1);

        let cross = Shape::new(
            2,
            vec![
                GroupPoint::z2(0, 0),
                GroupPoint::z2(1, 0),
                GroupPoint::z2(-1, 0),
                GroupPoint::z2(0, 1),
                GroupPoint::z2(0, -1),
            ],
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for n in [4i64, 8, 16, 32] {
            let d = folner_box(2, n).unwrap().invariance_defect(&cross).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn shape_json_round_trip() {
        let s = zshape(&[3, 1, 2]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"dim":1,"points":[1,2,3]}"#);
        let back: Shape = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);

        let r = Shape::rect(2, 1).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"dim":2,"points":[[0,0],[1,0]]}"#);
        let back: Shape = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn symmetric_difference_matches_naive() {
        let a = zshape(&[0, 1, 2, 5, 9]);
        let b = zshape(&[1, 2, 3, 9, 11]);
        // naive: {0,5} vs {3,11}
        assert_eq!(a.symmetric_difference_len(&b), 4);
        assert_eq!(a.symmetric_difference_len(&a), 0);
    }
}
