//! Labelled seed derivation.
//!
//! A single root seed is split into independent child streams by fixed
//! labels, so adding a subsystem never shifts the draws of another one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn child(&self, label: &str) -> SeedTree {
        SeedTree {
            root: splitmix64(self.root ^ fnv1a(label)),
        }
    }

    pub fn index(&self, i: u64) -> SeedTree {
        SeedTree {
            root: splitmix64(self.root.wrapping_add(splitmix64(i ^ 0xA5A5_A5A5))),
        }
    }

    pub fn rng(&self) -> Rng {
        Rng::seed_from_u64(self.root)
    }
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
