//! Reproducible random streams.
//!
//! Every trial draws from its own ChaCha8 stream whose 256-bit key is
//! expanded from `derive_seed(master, lane, index)` with splitmix64. Results
//! therefore depend only on `(master seed, lane, trial index)` and never on
//! how trials are scheduled across threads.
//!
//! The mixing function is fixed:
//!
//! ```text
//! derive_seed(master, lane, index) =
//!     splitmix64(splitmix64(master ^ splitmix64(lane)) ^ splitmix64(index ^ 0xA076_1D64_78BD_642F))
//! ```

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// One step of the splitmix64 generator, used as a 64-bit mixer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, lane: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(lane)) ^ splitmix64(index ^ 0xA076_1D64_78BD_642F))
}

/// Independent sub-streams used inside one computation.
pub mod lanes {
    pub const TRIALS: u64 = 0;
    pub const OCCUPATION: u64 = 1;
    pub const RETURNS: u64 = 2;
    pub const CALIBRATION: u64 = 3;
}

/// Single-owner random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = seed;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        Self {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn for_trial(master: u64, index: u64) -> Self {
        Self::from_seed(derive_seed(master, lanes::TRIALS, index))
    }

    pub fn for_lane(master: u64, lane: u64, index: u64) -> Self {
        Self::from_seed(derive_seed(master, lane, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform index in `0..n` by multiply-high on a 64-bit draw.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = RandomStream::for_trial(42, 7);
        let mut b = RandomStream::for_trial(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn trials_and_lanes_differ() {
        let a = RandomStream::for_trial(42, 0).next_u64();
        let b = RandomStream::for_trial(42, 1).next_u64();
        let c = RandomStream::for_lane(42, lanes::RETURNS, 0).next_u64();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mixing_function_is_frozen() {
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        let s = derive_seed(1, 0, 0);
        assert_eq!(s, derive_seed(1, 0, 0));
        assert_ne!(s, derive_seed(0, 0, 1));
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = RandomStream::from_seed(3);
        assert!((0..1000).all(|_| r.below(7) < 7));
    }
}
