//! Seeded randomness shared by the pool builder and ICWS.
//!
//! Everything here is part of the reproducibility contract: sketches built by
//! two processes agree only if they draw the same bits. The generator is
//! SplitMix64 (Steele, Lea & Flood) and the avalanche mixer is its output
//! finalizer, so both are fully specified by the constants below.

use rand_core::RngCore;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer. Bijective on `u64` with full avalanche.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for the per-(feature, hash index) ICWS generator.
///
/// Nested rather than XOR-combined so that `(z, k)` and `(k, z)` do not collide.
#[inline]
pub fn feature_hash_seed(z: u64, k: u64, base_seed: u64) -> u64 {
    mix64(mix64(z ^ base_seed) ^ mix64(k.wrapping_add(GOLDEN_GAMMA)))
}

/// Counter-based 64-bit generator: state advances by a fixed odd constant and
/// each output is the mixed state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }
}

impl RngCore for SplitMix64 {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dst)
    }
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Uniform on `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * INV_2_53
}

/// Uniform on `(0, 1)`; an exact zero is re-drawn so `ln` stays finite.
#[inline]
pub fn open_unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = unit_f64(rng);
        if u > 0.0 {
            return u;
        }
    }
}

/// Gamma(2, 1) as the sum of two unit exponentials.
#[inline]
pub fn gamma21_from_uniforms(u1: f64, u2: f64) -> f64 {
    -u1.ln() - u2.ln()
}

/// One Gamma(shape 2, scale 1) variate.
#[inline]
pub fn gamma21<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = open_unit_f64(rng);
    let u2 = open_unit_f64(rng);
    gamma21_from_uniforms(u1, u2)
}
