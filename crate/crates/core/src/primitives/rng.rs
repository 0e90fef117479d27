use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function applied to `seed + k·γ`.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for worker/block `index`: `master ^ splitmix64(index)`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    master ^ splitmix64(index)
}

/// Seeded, platform-independent uniform stream (ChaCha8).
///
/// A stream is owned by one worker. Parallel code derives one child stream per
/// block with [`RandomStream::split`].
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream for block `index`, independent of how far `self` has advanced.
    pub fn split(&self, index: u64) -> Self {
        Self::new(split_seed(self.seed, index))
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        self.rng.next_u64() >> 63 == 1
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_first_million_draws() {
        let mut a = RandomStream::new(0xDA7_11E);
        let mut b = RandomStream::new(0xDA7_11E);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn first_draws_are_pinned() {
        // Guards against silent changes in the generator or seeding routine.
        let mut s = RandomStream::new(42);
        let first: Vec<u64> = (0..3).map(|_| s.next_u64()).collect();
        assert_eq!(
            first,
            [
                0xae90_bfb5_395d_5ba1,
                0xf345_3fc6_2579_9188,
                0x6d71_b708_c5b6_538c
            ]
        );
    }

    #[test]
    fn split_streams_differ_and_ignore_parent_position() {
        let mut parent = RandomStream::new(7);
        let a = parent.split(0);
        parent.uniform();
        let b = parent.split(0);
        assert_eq!(a.seed(), b.seed());
        assert_ne!(parent.split(0).seed(), parent.split(1).seed());
        assert_ne!(split_seed(7, 0), 7);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = RandomStream::new(1);
        let mut sum = 0.0;
        for _ in 0..100_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        assert!((sum / 100_000.0 - 0.5).abs() < 0.005);
    }
}
