//! Seed derivation.
//!
//! Every stochastic stream in an episode (weather, initial soil draws,
//! observation noise) is seeded from a single 64-bit episode seed through
//! [`derive_seed`], and batch runs derive episode seeds the same way. The
//! mixing function is the SplitMix64 finalizer, so any client that wants to
//! replay a trajectory can reproduce the seeds without linking this crate.

/// Stream tags used when splitting an episode seed.
pub const WEATHER_STREAM: u64 = 1;
pub const INIT_STREAM: u64 = 2;
pub const NOISE_STREAM: u64 = 3;

/// Mix `base` and `stream` into an independent-looking 64-bit seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
