//! Seeded random streams.
//!
//! Every unit of parallel work (a stratum, a chunk of samples) draws from its
//! own ChaCha stream selected by index, so results never depend on how the
//! work is scheduled across worker threads.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Samples per chunk for chunked (unstratified) sampling.
pub const CHUNK: usize = 4096;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Chunk boundaries `[start, end)` covering `0..n`.
pub(crate) fn chunks(n: usize) -> impl Iterator<Item = (u64, usize, usize)> + Clone {
    (0..n.div_ceil(CHUNK)).map(move |c| (c as u64, c * CHUNK, ((c + 1) * CHUNK).min(n)))
}

/// `n` seeded points of `(0, scale)`, drawn chunk by chunk from streams
/// `first_stream + chunk`.
pub fn uniform_points(n: usize, seed: u64, first_stream: u64, scale: f64) -> Vec<f64> {
    chunks(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(c, start, end)| {
            let mut g = stream(seed, first_stream + c);
            (start..end).map(move |_| scale * g.sample::<f64, _>(Open01))
        })
        .collect()
}
