//! Deterministic stream derivation.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by
//! (master seed, trial index, stream domain). A trial therefore sees the
//! same randomness no matter which worker executes it or in which order,
//! so serial and parallel runs agree bit-exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which consumer of randomness a stream feeds within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Target record / dataset draws from the prior.
    Data = 0,
    /// Mechanism noise.
    Mechanism = 1,
    /// Adversary-internal sampling (empirical Bayes draws).
    Adversary = 2,
    /// Uniform index draw in the average-target game.
    TargetIndex = 3,
}

/// Derive the ChaCha stream for `(seed, trial, domain)`.
pub fn derive_rng(seed: u64, trial: u64, domain: StreamDomain) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(&(domain as u64).to_le_bytes());
    key[24..32].copy_from_slice(b"rr/games");
    ChaCha8Rng::from_seed(key)
}
