//! Benchmark-only crate; see `benches/benchmarks.rs`.
//!
//! Shared fixture builders live here so the bench targets stay small.

use omg_core::rng::{stream, StreamId};
use omg_core::PayoffMatrix;
use rand_chacha::ChaCha8Rng;

pub use omg_core;

pub fn probe_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, StreamId::Probe, 0)
}

pub fn random_matrix(d1: usize, d2: usize, scale: f64, rng: &mut ChaCha8Rng) -> PayoffMatrix {
    use rand::Rng;
    let entries: Vec<f64> = (0..d1 * d2).map(|_| rng.gen_range(-scale..scale)).collect();
    PayoffMatrix::new(d1, d2, entries, scale).expect("bounded random matrix")
}
