//! Counter-based SplitMix64.
//!
//! Output `i` (0-based) of a stream seeded with `s` is `mix(s + (i+1)·γ)` with
//! `γ = 0x9E3779B97F4A7C15` and the standard SplitMix64 finalizer, all mod
//! 2⁶⁴. This is the reference SplitMix64 sequence, so any language can
//! reproduce it from the test vectors below.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { seed, counter: 0 }
    }

    /// An independent stream for one cell of a larger computation.
    ///
    /// `derive(s, [t₁, …, t_k])` seeds with `x_k`, where `x₀ = s` and
    /// `x_i = mix(mix(x_{i−1} + γ) + t_i)`.
    pub fn derive(seed: u64, tags: &[u64]) -> Self {
        let mut s = seed;
        for &tag in tags {
            s = mix64(mix64(s.wrapping_add(GAMMA)).wrapping_add(tag));
        }
        SplitMix64::new(s)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.seed.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `0..bound` by rejection. Panics if `bound` is zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // smallest accepted value making the accepted range a multiple of bound
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    pub fn below_usize(&mut self, bound: usize) -> usize {
        self.below(bound as u64) as usize
    }

    /// Top bit of the next output.
    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// True with probability `p`, using 53 bits of the next output.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        u < p
    }
}
