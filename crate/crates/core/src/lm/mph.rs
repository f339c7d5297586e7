//! Minimal perfect hashing by hash-and-displace.
//!
//! Keys are first split into buckets by one hash, then each bucket (largest
//! first) searches for a displacement `d` that drops all its keys into
//! still-free slots of a table with exactly one slot per key, via
//! `slot = (h1(key) + (d / n) * h2(key) + d % n) mod n`. The additive
//! `d % n` term walks every slot for a fixed `d / n`, so a single-key
//! bucket is guaranteed to place within `n` attempts no matter which slots
//! remain free. Lookups recompute the bucket, read its displacement, and
//! land on the slot; keys that were never built in land on an arbitrary
//! slot, which the caller screens out with fingerprints.
//!
//! All hashing is the seeded FNV-1a/splitmix64 combination in
//! [`hash_bytes`], fixed as part of the on-disk format.

use crate::error::{Error, Result};
pub(crate) use crate::hashing::{hash_bytes, splitmix64};

/// Average keys per bucket; the displacement search gets harder as this
/// grows and the seed array shrinks.
const LAMBDA: usize = 4;

/// Build retries (bumping the seed) before giving up.
const MAX_BUILD_ATTEMPTS: u64 = 16;

/// Displacement attempts per bucket before the whole build retries with
/// the next seed. Must cover at least a few multiples of the table size so
/// the `d % n` walk can wrap with several `d / n` multipliers.
fn displacement_budget(n: usize) -> u64 {
    (4 * n as u64).max(1 << 18).min(u32::MAX as u64 - 1)
}

const BUCKET_SALT: u64 = 0x9ae1_6a3b_2f90_404f;
const H1_SALT: u64 = 0x5851_f42d_4c95_7f2d;
const H2_SALT: u64 = 0x1405_7b7e_f767_814f;

#[derive(Debug, Clone)]
pub(crate) struct Mph {
    seed: u64,
    /// Per bucket: displacement + 1; 0 marks a bucket that owns no keys.
    bucket_seeds: Vec<u32>,
    n: usize,
}

struct KeyHashes {
    bucket: usize,
    h1: u64,
    h2: u64,
}

fn key_hashes(seed: u64, key: &[u8], n: usize, m: usize) -> KeyHashes {
    let bucket = (hash_bytes(seed ^ BUCKET_SALT, key) % m as u64) as usize;
    let h1 = hash_bytes(seed ^ H1_SALT, key) % n as u64;
    let h2 = if n > 1 { 1 + hash_bytes(seed ^ H2_SALT, key) % (n as u64 - 1) } else { 0 };
    KeyHashes { bucket, h1, h2 }
}

fn slot_for(h: &KeyHashes, d: u64, n: usize) -> usize {
    let (mult, shift) = (d / n as u64, d % n as u64);
    ((h.h1 + (mult % n as u64) * h.h2 + shift) % n as u64) as usize
}

impl Mph {
    /// Builds a minimal perfect hash over distinct `keys`. The slot order
    /// depends only on the key set and the seed.
    pub fn build<K: AsRef<[u8]>>(keys: &[K], seed: u64) -> Result<Self> {
        let n = keys.len();
        if n == 0 {
            return Ok(Mph { seed, bucket_seeds: Vec::new(), n: 0 });
        }
        {
            let mut sorted: Vec<&[u8]> = keys.iter().map(|k| k.as_ref()).collect();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument("duplicate keys in perfect-hash build".into()));
            }
        }

        let m = n.div_ceil(LAMBDA).max(1);
        for attempt in 0..MAX_BUILD_ATTEMPTS {
            let attempt_seed = seed.wrapping_add(attempt);
            if let Some(bucket_seeds) = try_build(keys, attempt_seed, n, m) {
                return Ok(Mph { seed: attempt_seed, bucket_seeds, n });
            }
        }
        Err(Error::MphConstruction { attempts: MAX_BUILD_ATTEMPTS * displacement_budget(n) })
    }

    /// Slot of a key in `[0, len)`. Bijective over the build keys; for any
    /// other key the result is either an arbitrary slot or None.
    pub fn slot(&self, key: &[u8]) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let m = self.bucket_seeds.len();
        let h = key_hashes(self.seed, key, self.n, m);
        match self.bucket_seeds[h.bucket] {
            0 => None,
            d_plus_one => Some(slot_for(&h, (d_plus_one - 1) as u64, self.n)),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bucket_seeds(&self) -> &[u32] {
        &self.bucket_seeds
    }

    pub fn from_parts(seed: u64, bucket_seeds: Vec<u32>, n: usize) -> Self {
        Mph { seed, bucket_seeds, n }
    }
}

fn try_build<K: AsRef<[u8]>>(keys: &[K], seed: u64, n: usize, m: usize) -> Option<Vec<u32>> {
    let hashes: Vec<KeyHashes> = keys.iter().map(|k| key_hashes(seed, k.as_ref(), n, m)).collect();

    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, h) in hashes.iter().enumerate() {
        buckets[h.bucket].push(i);
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&b| (usize::MAX - buckets[b].len(), b));

    let mut occupied = vec![false; n];
    let mut bucket_seeds = vec![0u32; m];
    let mut placed: Vec<usize> = Vec::with_capacity(LAMBDA * 2);
    let budget = displacement_budget(n);

    for &b in &order {
        let members = &buckets[b];
        if members.is_empty() {
            break; // sorted by size: the rest are empty too
        }
        let mut found = false;
        'search: for d in 0..budget {
            placed.clear();
            for &k in members {
                let s = slot_for(&hashes[k], d, n);
                if occupied[s] || placed.contains(&s) {
                    continue 'search;
                }
                placed.push(s);
            }
            for &s in &placed {
                occupied[s] = true;
            }
            bucket_seeds[b] = (d + 1) as u32;
            found = true;
            break;
        }
        if !found {
            return None;
        }
    }
    Some(bucket_seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn keys(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("key-{i}-{}", i * 7919)).collect()
    }

    fn assert_bijective(mph: &Mph, keys: &[String]) {
        let slots: HashSet<usize> = keys
            .iter()
            .map(|k| mph.slot(k.as_bytes()).expect("build key must resolve"))
            .collect();
        assert_eq!(slots.len(), keys.len());
        assert!(slots.iter().all(|&s| s < keys.len()));
    }

    #[test]
    fn three_keys_map_to_three_slots() {
        let ks = keys(3);
        let mph = Mph::build(&ks, 1).unwrap();
        assert_bijective(&mph, &ks);
    }

    #[test]
    fn ten_thousand_keys_stay_bijective() {
        let ks = keys(10_000);
        let mph = Mph::build(&ks, 42).unwrap();
        assert_bijective(&mph, &ks);
    }

    #[test]
    fn empty_key_set_answers_none() {
        let mph = Mph::build::<&[u8]>(&[], 1).unwrap();
        assert_eq!(mph.slot(b"anything"), None);
        assert_eq!(mph.len(), 0);
    }

    #[test]
    fn single_key() {
        let mph = Mph::build(&["solo"], 9).unwrap();
        assert_eq!(mph.slot(b"solo"), Some(0));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = Mph::build(&["a", "b", "a"], 1).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn same_seed_same_function() {
        let ks = keys(500);
        let a = Mph::build(&ks, 7).unwrap();
        let b = Mph::build(&ks, 7).unwrap();
        for k in &ks {
            assert_eq!(a.slot(k.as_bytes()), b.slot(k.as_bytes()));
        }
        assert_eq!(a.bucket_seeds(), b.bucket_seeds());
    }

    #[test]
    fn reconstructed_from_parts_matches() {
        let ks = keys(100);
        let built = Mph::build(&ks, 3).unwrap();
        let copy = Mph::from_parts(built.seed(), built.bucket_seeds().to_vec(), built.len());
        for k in &ks {
            assert_eq!(built.slot(k.as_bytes()), copy.slot(k.as_bytes()));
        }
    }
}
