//! Seeded, platform-stable randomness.
//!
//! Every stochastic operation takes an explicit `u64` seed and derives a
//! ChaCha8 stream from it, so runs are reproducible byte-for-byte. Distinct
//! stages of a pipeline split substreams via [`substream`] tags instead of
//! sharing one generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for stage `tag` of a seeded pipeline
/// (splitmix64 finalizer over seed xor tag).
pub fn substream(seed: u64, tag: u64) -> SeededRng {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Draws an index from fixed nonnegative weights by inverse transform.
/// Weights need not be normalized; at least one must be positive.
#[derive(Clone, Debug)]
pub struct DiscreteSampler {
    cumulative: Vec<f64>,
    total: f64,
}

impl DiscreteSampler {
    pub fn new(weights: &[f64]) -> Option<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return None;
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in weights {
            acc += w;
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return None;
        }
        Some(DiscreteSampler { cumulative, total: acc })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen::<f64>() * self.total;
        match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&u).unwrap())
        {
            Ok(i) => (i + 1).min(self.cumulative.len() - 1),
            Err(i) => i.min(self.cumulative.len() - 1),
        }
    }
}
