//! Seed derivation for independent deterministic streams.

/// splitmix64 finalizer over the pair, so per-channel and per-trial streams
/// never collide.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Three-way variant for (condition, gesture, trial) style derivations.
pub fn mix_seed3(base: u64, a: u64, b: u64, c: u64) -> u64 {
    mix_seed(
        mix_seed(mix_seed(base, a.wrapping_add(1)), b.wrapping_add(0x1000)),
        c,
    )
}
