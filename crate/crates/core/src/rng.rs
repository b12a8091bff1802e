//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream whose key holds the study seed and the
//! sample index and whose 64-bit stream id selects the mode (or the Brownian
//! path for the finite element runs). A draw therefore depends only on
//! (seed, sample, stream), never on which thread produced it or in what order.

use crate::grid::TimeGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const DOMAIN_TAG: u64 = 0x6672_6163_7369_6d31; // "fracsim1"

/// Stream id used for the scalar Brownian motion driving the FEM runs.
pub const BROWNIAN_STREAM: u64 = u64::MAX;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub sample: u64,
    pub stream: u64,
}

impl StreamKey {
    pub fn new(seed: u64, sample: u64, stream: u64) -> Self {
        Self {
            seed,
            sample,
            stream,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.sample.to_le_bytes());
        key[16..24].copy_from_slice(&DOMAIN_TAG.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng
    }

    /// `n` independent standard normal draws.
    pub fn normals(&self, n: usize) -> Vec<f64> {
        let mut rng = self.rng();
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }
}

/// Increments β(t_n) − β(t_{n−1}), n = 1..M, of a standard Brownian motion.
pub fn brownian_increments(grid: &TimeGrid, seed: u64, sample: u64) -> Vec<f64> {
    let sd = grid.dt().sqrt();
    StreamKey::new(seed, sample, BROWNIAN_STREAM)
        .normals(grid.steps())
        .into_iter()
        .map(|x| x * sd)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = StreamKey::new(7, 3, 11).normals(64);
        let b = StreamKey::new(7, 3, 11).normals(64);
        assert_eq!(a, b);
        assert_ne!(a, StreamKey::new(7, 3, 12).normals(64));
        assert_ne!(a, StreamKey::new(7, 4, 11).normals(64));
        assert_ne!(a, StreamKey::new(8, 3, 11).normals(64));
    }

    #[test]
    fn prefix_stability() {
        // drawing fewer values yields a prefix of the longer draw
        let long = StreamKey::new(1, 2, 3).normals(100);
        let short = StreamKey::new(1, 2, 3).normals(10);
        assert_eq!(&long[..10], &short[..]);
    }

    #[test]
    fn normal_moments() {
        let x = StreamKey::new(42, 0, 0).normals(200_000);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 3.0 / n.sqrt() * 1.5);
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n).sqrt() * 1.5);
    }

    #[test]
    fn brownian_increment_variance() {
        let g = TimeGrid::new(1.0, 1000).unwrap();
        let inc = brownian_increments(&g, 5, 0);
        assert_eq!(inc.len(), 1000);
        let qv: f64 = inc.iter().map(|d| d * d).sum();
        // quadratic variation ≈ T, sd √(2/M)
        assert!((qv - 1.0).abs() < 4.0 * (2.0f64 / 1000.0).sqrt());
    }
}
