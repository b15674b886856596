//! Seeded random streams.
//!
//! Every chain owns a ChaCha8 generator. Replica `r` of an experiment with
//! master seed `s` uses the key derived from `s` by `seed_from_u64` and the
//! ChaCha stream number `r`, so replica streams are independent, can be
//! regenerated in isolation, and do not depend on how replicas are
//! scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replica_rng(master_seed: u64, replica: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}
