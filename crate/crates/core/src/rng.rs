//! Deterministic random variates with independent substreams.
//!
//! Every stochastic element of a simulation (a node, a permutation source,
//! an ensemble member) owns its own [`RandomStream`]. Streams are ChaCha8
//! keyed by the run seed and selected by a 64-bit stream id, so any
//! `(seed, substream, draw index)` triple maps to a fixed variate without
//! shared mutable state.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream id reserved for draws that do not belong to a node
/// (e.g. per-sweep permutations in the clocked engine).
pub const AUX_STREAM: u64 = u64::MAX;

/// A seedable, splittable source of uniform variates.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    substream: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, substream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        // Spread the seed over the whole key so nearby seeds share no key words.
        key[8..16].copy_from_slice(&splitmix64(seed).to_le_bytes());
        key[16..24].copy_from_slice(&splitmix64(seed ^ 0x5851_f42d_4c95_7f2d).to_le_bytes());
        key[24..].copy_from_slice(&splitmix64(!seed).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(substream);
        Self {
            seed,
            substream,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`; safe to pass to `ln`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform01()
    }

    /// Uniform on `[-1, 1)`.
    #[inline]
    pub fn uniform_pm1(&mut self) -> f64 {
        2.0 * self.uniform01() - 1.0
    }

    /// Fair coin returning `true` with probability 1/2.
    #[inline]
    pub fn coin(&mut self) -> bool {
        self.rng.next_u32() & 1 == 1
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift with rejection).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.rng.next_u64();
            let m = (x as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Number of Bernoulli trials up to and including the first success, where
    /// each trial fails with probability `exp(-dt / tau)`.
    ///
    /// Returns `u64::MAX` when the wait exceeds the representable range.
    pub fn geometric_steps(&mut self, dt: f64, tau: f64) -> u64 {
        let e = -libm::log(self.uniform_open0());
        let steps = libm::ceil(e * tau / dt);
        if !(steps < 1.8e19) {
            u64::MAX
        } else if steps < 1.0 {
            1
        } else {
            steps as u64
        }
    }
}

/// Mix a 64-bit value (SplitMix64 finalizer).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent replica (ensemble member, sweep point)
/// of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0xa076_1d64_78bd_642f)))
}
