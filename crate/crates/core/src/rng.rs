//! Deterministic random streams.
//!
//! Every stochastic component of a run draws from its own ChaCha8 stream keyed
//! by `(seed, stream id, round)`. Streams are therefore independent of thread
//! scheduling and of each other: the adversary's matrices for round `t` do not
//! change if the learner consumes more or fewer samples.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels for the per-run substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    Adversary = 1,
    Learner = 2,
    Probe = 3,
}

/// Build the ChaCha8 stream for `(seed, stream, round)`.
///
/// `round` is 0 for sequential streams (the bandit learner draws from one
/// stream across the whole run) and the round index for per-round streams
/// (the random adversary keys one stream per emitted matrix so emission is a
/// pure function of `(spec, t)`).
pub fn stream(seed: u64, id: StreamId, round: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(id as u64).to_le_bytes());
    key[16..24].copy_from_slice(&round.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Sample an index from a probability vector by inverse CDF, walking the
/// cumulative sum in ascending index order. The final index absorbs any
/// round-off left in the tail.
pub fn sample_categorical<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    debug_assert!(!weights.is_empty());
    let u: f64 = rng.gen::<f64>();
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return i;
        }
    }
    weights.len() - 1
}
