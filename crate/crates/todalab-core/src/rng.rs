//! Deterministic random number generation.
//!
//! Every stochastic routine draws from an [`RngStream`], a ChaCha12 generator
//! keyed by a user seed and a stream index. Parallel replica loops assign
//! stream `r` to replica `r`, which makes output independent of the number of
//! worker threads.

use crate::special::erf::normal_quantile;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A seeded, streamed random source.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Creates the generator for `(seed, stream)`. The 64-bit seed is expanded
    /// to the full ChaCha key with splitmix64 so that nearby seeds produce
    /// unrelated states.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * 2f64.powi(-53) + 2f64.powi(-54)
    }

    /// Standard normal draw via the quantile transform, so a single uniform is
    /// consumed per variate regardless of rejection behaviour.
    pub fn standard_normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    /// Exponential draw with unit mean.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Gamma(shape, 1) draw for integer shape, as a sum of exponentials.
    pub fn gamma_integer(&mut self, shape: u32) -> f64 {
        let mut acc = 0.0;
        for _ in 0..shape {
            acc += self.exponential();
        }
        acc
    }

    /// Raw 64-bit output, exposed for hashing-style uses.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}
