//! Deterministic random streams.
//!
//! The generator is xoshiro256** (Blackman and Vigna, 2018; period 2^256 - 1),
//! with its 256-bit state expanded from a 64-bit seed by SplitMix64. Both
//! algorithms are fully specified integer recurrences, so a given seed yields
//! the same sequence on every platform.
//!
//! Substreams are derived by hashing a seed together with a path of 64-bit
//! labels (`RngStream::derive`). This is how calibration replicates and
//! power-study trials get independent streams that do not depend on the
//! order in which they are executed.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of SplitMix64: advances `state` and returns the mixed output.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix64(x: u64) -> u64 {
    let mut s = x;
    splitmix64(&mut s)
}

/// Hashes `seed` and `path` into a new 64-bit seed.
///
/// Distinct paths give statistically unrelated seeds; the same path always
/// gives the same seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut h = mix64(seed ^ 0x6A09_E667_F3BC_C908);
    for (depth, &label) in path.iter().enumerate() {
        let tagged = mix64(label.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
        h = mix64(h.rotate_left(23) ^ tagged);
    }
    h
}

/// A single-owner pseudo-random stream (xoshiro256**).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    s: [u64; 4],
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        RngStream { s }
    }

    /// Stream for the substream labelled `path` under `seed`.
    pub fn derive(seed: u64, path: &[u64]) -> Self {
        RngStream::new(derive_seed(seed, path))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw on the open interval (0, 1), with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..bound` (Lemire's multiply-shift with rejection).
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "bound must be positive");
        let bound = bound as u64;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            let low = m as u64;
            if low >= bound.wrapping_neg() % bound {
                return (m >> 64) as usize;
            }
        }
    }
}
