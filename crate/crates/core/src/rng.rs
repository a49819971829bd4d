//! Counter-based random source used by every instance generator.
//!
//! Generator `splitmix64-v1`: draw number `k` (0-based) of a stream with seed
//! `s` is `splitmix64(s + (k + 1) * 0x9E3779B97F4A7C15)` (wrapping), where
//! `splitmix64` is the standard finalizer
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! Uniforms on [0, 1) take the top 53 bits: `(u >> 11) * 2^-53`. Gaussians use
//! Box–Muller on two consecutive uniforms `u1, u2`, with `u1` mapped to
//! `1 - u1` so the logarithm never sees zero, and both the cosine and the sine
//! branch are returned in that order. Any implementation following these
//! rules reproduces the generated instances bit for bit.

pub const GENERATOR_NAME: &str = "splitmix64-v1";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
    spare_normal: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        splitmix64(
            self.seed
                .wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * t.sin());
        r * t.cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }
}
