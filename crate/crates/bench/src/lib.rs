//! Shared generators for the criterion benches.

use rand::Rng;
use shiftlab_core::empirical::BlockDistribution;
use shiftlab_core::lattice::Shape;
use shiftlab_core::rng::seeded;
use shiftlab_core::symbolic::{Configuration, Symbol};

/// Random probability distribution over binary blocks of the given length.
pub fn random_distribution(cells: i64, support: usize, seed: u64) -> BlockDistribution {
    let mut rng = seeded(seed);
    let domain = Shape::interval(cells).unwrap();
    let mut entries: Vec<(Vec<Symbol>, f64)> = Vec::new();
    while entries.len() < support {
        let key: Vec<Symbol> = (0..cells).map(|_| rng.gen_range(0..2)).collect();
        if !entries.iter().any(|(k, _)| k == &key) {
            entries.push((key, rng.gen::<f64>() + 1e-3));
        }
    }
    let total: f64 = entries.iter().map(|(_, m)| m).sum();
    for e in entries.iter_mut() {
        e.1 /= total;
    }
    BlockDistribution::from_weights(domain, entries).unwrap()
}

/// I.i.d. fair-binary configuration on an interval.
pub fn random_configuration(len: i64, seed: u64) -> Configuration {
    let mut rng = seeded(seed);
    let values: Vec<Symbol> = (0..len).map(|_| rng.gen_range(0..2)).collect();
    Configuration::new(Shape::interval(len).unwrap(), values).unwrap()
}

/// Random square cost matrix with entries in [0, 1).
pub fn random_cost_matrix(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    (0..n).map(|_| (0..n).map(|_| rng.gen()).collect()).collect()
}
