//! Seeding and counter-based random streams.
//!
//! The graph simulator draws step `m` as a pure function of `(seed, m)` so
//! that runs with different `p` share the same edge sequence. Replicas get
//! their own seed through [`replica_seed`].

/// SplitMix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replica `index` in a run seeded with `seed`:
/// `splitmix64(seed XOR index)`. Stable across versions.
#[inline]
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ index)
}

/// Word number `lane` of step `step` in the stream keyed by `seed`.
#[inline]
pub fn counter_word(seed: u64, step: u64, lane: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(step)) ^ lane.wrapping_mul(0xd605_bbb5_8c8a_bbd1))
}

/// Map a word to `0..n` by a 128-bit multiply-high (bias below `n/2^64`).
#[inline]
pub fn below(word: u64, n: u64) -> u64 {
    ((word as u128 * n as u128) >> 64) as u64
}

/// Uniform on `(0, 1]` with 53 random bits.
#[inline]
pub fn unit_open_closed(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}
