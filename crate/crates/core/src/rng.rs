//! Seeded random streams. Every run takes one named seed; independent
//! subjects or episodes draw from distinct ChaCha streams of that seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
