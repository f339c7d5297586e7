//! Seeded, platform-stable hashing shared by the persisted formats and by
//! deterministic seeding (per-order hash tables, bag sampling). These exact
//! functions are part of the on-disk layouts — changing them invalidates
//! saved models.

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seeded FNV-1a over the key bytes with a splitmix64 finalizer.
pub(crate) fn hash_bytes(seed: u64, key: &[u8]) -> u64 {
    let mut h = seed ^ 0xcbf2_9ce4_8422_2325;
    for &b in key {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}
