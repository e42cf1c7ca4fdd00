//! Desk-scale workbench for symbolic dynamics on the lattices Z and Z^2:
//! exact tilings of finite regions, empirical block statistics, coupling
//! distances between block distributions, entropy estimators, independent-
//! tile lift constructions, entropy-interpolating tile replacement, and a
//! finite very-weak-Bernoulli criterion for two-track Z-processes.
//!
//! All stochastic operations take explicit `u64` seeds and are reproducible
//! byte-for-byte on a fixed platform.

pub mod construct;
pub mod empirical;
pub mod entropy;
pub mod error;
pub mod interpolate;
pub mod lattice;
pub mod metrics;
pub mod rng;
pub mod symbolic;
pub mod tiling;
pub mod vwb;

pub use construct::{TileLaw, TupleConfiguration, TupleSymbol};
pub use empirical::{BlockDistribution, ClosenessSpec};
pub use entropy::JointCellTable;
pub use error::{Error, Result};
pub use metrics::{Coupling, FinitePartitionMeasure};
pub use interpolate::ReplacementPlan;
pub use lattice::{folner_box, GroupPoint, Shape};
pub use symbolic::{Alphabet, Block, Configuration, Symbol};
pub use tiling::{ShapeSystem, Tile, TilingSample};
pub use vwb::{GAssignment, TwoTrackSample};
