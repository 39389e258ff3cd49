//! Deterministic random streams.
//!
//! Every draw in the engine comes from a [`RandomStream`] keyed by
//! `(seed, stream_id)`. The seed expands into a ChaCha8 key and the stream id
//! selects one of ChaCha's 2^64 independent streams, so a sample's draws
//! depend only on its own key and never on generation order or worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream ids of unlimited-mode samples carry this bit; base dataset indices
/// never do, so the two can never share a stream.
pub const EPOCH_INDEX_BIT: u64 = 1 << 63;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    inner: ChaCha8Rng,
}

/// Opens the stream `stream_id` of the generator keyed by `seed`.
pub fn seeded_rng(seed: u64, stream_id: u64) -> RandomStream {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    let mut inner = ChaCha8Rng::from_seed(key);
    inner.set_stream(stream_id);
    RandomStream { inner }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// The independent draw sources of one synthetic sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Component {
    RhythmSpec = 1,
    NoiseSpec = 2,
    NoiseRender = 3,
    TrendSpec = 4,
    TrendRender = 5,
    Ratios = 6,
}

/// Stream id for one component of sample `sample_index`.
pub fn component_stream_id(sample_index: u64, component: Component) -> u64 {
    mix64(mix64(sample_index) ^ (component as u64).wrapping_mul(GOLDEN_GAMMA))
}

pub fn component_rng(seed: u64, sample_index: u64, component: Component) -> RandomStream {
    seeded_rng(seed, component_stream_id(sample_index, component))
}

/// Sample index used for item `index` of unlimited-mode epoch `epoch`.
pub fn epoch_sample_index(epoch: u64, index: u64) -> u64 {
    mix64(mix64(epoch.wrapping_add(GOLDEN_GAMMA)) ^ index) | EPOCH_INDEX_BIT
}
