//! Small deterministic PRNG (SplitMix64).
//!
//! Hand-rolled so that seeded runs are byte-stable across platforms and
//! toolchain upgrades, which the CLI determinism contract requires.

/// SplitMix64 generator. Not cryptographic; statistical quality is ample
/// for Monte Carlo cross-checks and codebook generation.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Samples an index from cumulative probabilities (last entry ~ 1).
    pub fn sample_cumulative(&mut self, cum: &[f64]) -> usize {
        let u = self.next_f64();
        match cum.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
        .min(cum.len() - 1)
    }
}
