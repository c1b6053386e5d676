use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Rows per randomness stream. Each block of rows gets its own stream, so the
/// output depends only on the seed and never on the number of workers.
pub(crate) const CHUNK: usize = 8192;

/// Fills `n` rows of `width` cells in parallel, row-major. `fill` receives the
/// row's stream and its global index.
pub(crate) fn generate<F>(n: usize, width: usize, seed: u64, fill: F) -> Vec<u32>
where
    F: Fn(&mut ChaCha8Rng, usize, &mut [u32]) + Sync,
{
    let mut flat = vec![0u32; n * width];
    if width == 0 {
        return flat;
    }
    flat.par_chunks_mut(CHUNK * width)
        .enumerate()
        .for_each(|(chunk, block)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            for (k, row) in block.chunks_exact_mut(width).enumerate() {
                fill(&mut rng, chunk * CHUNK + k, row);
            }
        });
    flat
}
