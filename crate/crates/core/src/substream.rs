//! Reproducible, independently addressable random substreams.
//!
//! Every variate in a simulation is a pure function of
//! `(master_seed, namespace, substream_id, role, draw_index)`. The master
//! seed, namespace and role select a ChaCha key; the substream id selects
//! the ChaCha stream (nonce); the draw index is the block-counter position.
//! Trajectories can therefore run in any order or on any thread and still
//! see exactly the same numbers.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Which random sequence of a trajectory a stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Ant steps `X_0, X_1, ...`
    Step,
    /// Rope stretches `L_1, L_2, ...`
    Stretch,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::Step => 0x5354_4550,    // "STEP"
            Role::Stretch => 0x5354_5245, // "STRE"
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(master_seed: u64, namespace: u64, role: Role) -> [u8; 32] {
    let mut state = master_seed;
    let a = splitmix64(&mut state);
    let mut state = a ^ namespace;
    let b = splitmix64(&mut state);
    let mut state = b ^ role.tag();
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Seed material shared by all trajectories of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    /// Separates independent experiments under one master seed (sweep grid points).
    pub namespace: u64,
}

impl StreamKey {
    pub const fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            namespace: 0,
        }
    }

    pub const fn with_namespace(self, namespace: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            namespace,
        }
    }

    pub fn substream(&self, substream_id: u64, role: Role) -> Substream {
        Substream::new(*self, substream_id, role)
    }
}

/// One random sequence; each call to [`Substream::next_u64`] is one draw.
#[derive(Debug, Clone)]
pub struct Substream {
    rng: ChaCha12Rng,
    draws: u64,
}

impl Substream {
    pub fn new(key: StreamKey, substream_id: u64, role: Role) -> Self {
        let mut rng = ChaCha12Rng::from_seed(derive_key(key.master_seed, key.namespace, role));
        rng.set_stream(substream_id);
        Self { rng, draws: 0 }
    }

    /// Positions the stream so the next draw has index `draw_index`.
    pub fn seek(&mut self, draw_index: u64) {
        self.rng.set_word_pos(u128::from(draw_index) * 2);
        self.draws = draw_index;
    }

    /// Index of the next draw.
    pub fn position(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }
}

/// Maps a raw draw to the open interval (0, 1) using its top 52 bits.
///
/// The result is `(k + 0.5) / 2^52`, exactly representable, so neither
/// endpoint is reachable.
pub fn open_unit(bits: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    ((bits >> 12) as f64 + 0.5) * SCALE
}
