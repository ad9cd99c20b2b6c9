//! Keyed, order-independent random streams.
//!
//! Every clip gets its own ChaCha stream whose key is a SHA-256 digest of
//! `(domain, seed, video id, clip index)`. Streams never depend on how many
//! other clips were drawn, or in which order, so sampling is reproducible under
//! any degree of parallelism.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Random stream owned by one clip of one video.
pub type ClipRng = ChaCha8Rng;

const CLIP_DOMAIN: &[u8] = b"tall/clip-stream/v1";
const SHUFFLE_DOMAIN: &[u8] = b"tall/order-shuffle/v1";

/// Derives the stream for clip `clip_index` of `video_id` under `seed`.
pub fn clip_stream(seed: u64, video_id: &str, clip_index: usize) -> ClipRng {
    let mut hasher = Sha256::new();
    hasher.update(CLIP_DOMAIN);
    hasher.update(seed.to_le_bytes());
    hasher.update((video_id.len() as u64).to_le_bytes());
    hasher.update(video_id.as_bytes());
    hasher.update((clip_index as u64).to_le_bytes());
    ChaCha8Rng::from_seed(digest_to_seed(hasher))
}

/// Stream used to shuffle sub-image order for a `Random(seed)` variant.
pub fn shuffle_stream(seed: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(SHUFFLE_DOMAIN);
    hasher.update(seed.to_le_bytes());
    ChaCha8Rng::from_seed(digest_to_seed(hasher))
}

fn digest_to_seed(hasher: Sha256) -> [u8; 32] {
    let mut key = [0u8; 32];
    key.copy_from_slice(&hasher.finalize());
    key
}
