//! Splittable seeding: every random stream is addressed by
//! (user seed, purpose, index) so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pulses simulated per independent random stream.
pub const PULSES_PER_BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    PulsedBlock = 1,
    Cw = 2,
    Thinning = 3,
    Aggregate = 4,
    Interference = 5,
    Bootstrap = 6,
    Noise = 7,
    Sweep = 8,
}

/// Independent generator for `(seed, purpose, index)`.
pub fn stream_rng(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Seed for the `index`-th independent run of a sweep.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    use rand::Rng;
    stream_rng(seed, Purpose::Sweep, index).random()
}
