//! Named, seeded, splittable random streams.
//!
//! A stream is identified by a 64-bit key. Child streams are derived from the
//! parent key and a label (or index), never from the parent's consumption
//! state, so any shot can be replayed in isolation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    key: u64,
    rng: ChaCha12Rng,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let key = mix(seed);
        Self {
            key,
            rng: ChaCha12Rng::seed_from_u64(key),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Child stream named by `label`.
    pub fn derive(&self, label: &str) -> Self {
        // FNV-1a over the label, folded with the parent key
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        Self::from_key(mix(self.key ^ mix(h)))
    }

    /// Child stream number `index` (e.g. one per shot).
    pub fn substream(&self, index: u64) -> Self {
        Self::from_key(mix(self.key.rotate_left(17) ^ mix(index.wrapping_add(1))))
    }

    fn from_key(key: u64) -> Self {
        Self {
            key,
            rng: ChaCha12Rng::seed_from_u64(key),
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
