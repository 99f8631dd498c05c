//! Reproducible random-number streams.
//!
//! All randomness derives from one `u64` seed. The generator is ChaCha12,
//! addressed by (seed, stream): the seed selects the key, the stream index
//! selects a statistically independent substream. The discipline is
//!
//! * one stream per trajectory index, so ensembles can be generated in any
//!   order or in parallel and still reproduce bitwise;
//! * multi-channel scenarios use `stream = trajectory * n_channels + channel`;
//! * unrelated purposes (e.g. optimizer starts) derive a fresh seed with
//!   [`purpose_seed`] before opening streams of their own.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Generator for one (seed, stream) address.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for one channel of one trajectory.
pub fn channel_stream(trajectory: u64, n_channels: u64, channel: u64) -> u64 {
    trajectory * n_channels + channel
}

/// Derive an unrelated sub-seed for a named purpose (FNV-1a over the label,
/// folded into the base seed).
pub fn purpose_seed(seed: u64, purpose: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in purpose.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    seed ^ h
}
