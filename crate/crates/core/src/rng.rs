//! Counter-based random substreams.
//!
//! Every random quantity in the crate is drawn from a generator keyed by
//! `(seed, purpose, index)`. Work items can then be evaluated in any order, on
//! any number of threads, and still reproduce the same numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = ChaCha8Rng;

/// Generator for data-length weight vectors (one variate per observation).
pub type BulkRng = Xoshiro256PlusPlus;

/// Purpose tags separating the substream families derived from one seed.
pub mod tag {
    pub const DIRICHLET: u64 = 1;
    pub const STICK_BREAKING: u64 = 2;
    pub const BAYESIAN_BOOTSTRAP: u64 = 3;
    pub const FREQUENTIST_BOOTSTRAP: u64 = 4;
    pub const ARM_CONTROL: u64 = 5;
    pub const ARM_TREATMENT: u64 = 6;
    pub const GROUP_SAMPLING: u64 = 7;
    pub const REFERENCE: u64 = 8;
    pub const CHECK: u64 = 9;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed; used to give each check or replication its own seed.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)) ^ index)
}

/// Generator for work item `index` of family `tag`.
pub fn substream(seed: u64, tag: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)));
    rng.set_stream(index);
    rng
}

/// Bulk generator for work item `index` of family `tag`.
pub fn bulk_substream(seed: u64, tag: u64, index: u64) -> BulkRng {
    BulkRng::seed_from_u64(derive_seed(seed, tag, index))
}

/// Uniform on the open interval (0, 1).
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
