//! Portable seeded randomness.
//!
//! Every random draw in this crate goes through [`SeededRng`], which wraps the
//! ChaCha8 stream cipher generator (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`. Only the raw `next_u64` stream is consumed; the
//! transforms on top of it are fixed here so that a seed reproduces the same
//! data on every platform:
//!
//! * uniform `[0, 1)`: the top 53 bits of one `u64`, scaled by `2^-53`;
//! * uniform integer below `n`: rejection sampling on the top of the `u64`
//!   range (no modulo bias);
//! * standard normal: Box–Muller, `sqrt(-2 ln u1) * cos(2π u2)` with
//!   `u1 ∈ (0, 1]` and `u2 ∈ [0, 1)` drawn in that order. The sine branch is
//!   discarded so every normal draw consumes exactly two `u64`s.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCALE_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * SCALE_53
    }

    /// Uniform on `(0, 1]`.
    fn uniform_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * SCALE_53
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
