//! Seed derivation for reproducible Monte Carlo runs.
//!
//! Every trial owns a generator seeded from `(master, axis_point, trial)`, so
//! results do not depend on how trials are scheduled across workers, and
//! growing the trial count leaves earlier trials untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all scenario and noise draws.
pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the master seed with an axis-point index and a trial index.
pub fn trial_seed(master: u64, axis_point: u64, trial: u64) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ axis_point.wrapping_mul(GOLDEN_GAMMA));
    splitmix64(b ^ trial.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
