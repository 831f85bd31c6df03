//! Deterministic random streams.
//!
//! Every run owns a 64-bit seed derived from `(master_seed, point, run)`.
//! Within a run each stochastic component draws from its own ChaCha stream,
//! so changing how many samples one component consumes never shifts the
//! draws of another. This is what lets a disaster run at `p_f = 0` reproduce
//! a nominal terrestrial run bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream identifiers inside one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Layout = 1,
    Failures = 2,
    Users = 3,
    Activity = 4,
    Shadowing = 5,
    Constellation = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` at sweep point `point`.
pub fn run_seed(master_seed: u64, point: u64, run: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ point) ^ run.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Random streams of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStreams {
    seed: u64,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(purpose as u64);
        rng
    }
}
