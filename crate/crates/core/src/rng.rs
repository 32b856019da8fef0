//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] keyed by a
//! master seed and positioned on one of its 2^64 streams. The stream id is a
//! pure function of the indices that identify the draw:
//!
//! ```text
//! stream = mix(mix(mix(mix(mix(EXPERIMENT_TAG ^ experiment) ^ n_index) ^ replication) ^ tree) ^ role)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. Changing any one index moves the
//! draw to an unrelated stream and leaves every other stream untouched, so a
//! replication's randomness does not depend on how many replications run or
//! on which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Data,
    Theta,
    IWeights,
    JWeights,
    Partition,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::Data => 1,
            Role::Theta => 2,
            Role::IWeights => 3,
            Role::JWeights => 4,
            Role::Partition => 5,
        }
    }
}

/// Coordinates of a stream below the master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub experiment: u64,
    pub n_index: u64,
    pub replication: u64,
    pub tree: u64,
    pub role: Role,
}

const EXPERIMENT_TAG: u64 = 0x6a09_e667_f3bc_c909;

pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn stream_id(&self) -> u64 {
        let mut h = mix(EXPERIMENT_TAG ^ self.experiment);
        h = mix(h ^ self.n_index);
        h = mix(h ^ self.replication);
        h = mix(h ^ self.tree);
        mix(h ^ self.role.tag())
    }

    pub fn rng(&self, master_seed: u64) -> StreamRng {
        stream_rng(master_seed, self.stream_id())
    }
}

/// A generator on stream `stream` of the master seed.
pub fn stream_rng(master_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// A generator for a single `u64` seed, as used by the standalone operations.
pub fn seeded(seed: u64) -> StreamRng {
    stream_rng(seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn key(replication: u64, role: Role) -> StreamKey {
        StreamKey {
            experiment: 0,
            n_index: 1,
            replication,
            tree: 0,
            role,
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a = key(3, Role::Data).rng(9).next_u64();
        let b = key(3, Role::Data).rng(9).next_u64();
        assert_eq!(a, b);
    }

    #[test]
    fn indices_and_roles_separate_streams() {
        let base = key(3, Role::Data).rng(9).next_u64();
        assert_ne!(base, key(4, Role::Data).rng(9).next_u64());
        assert_ne!(base, key(3, Role::Theta).rng(9).next_u64());
        assert_ne!(base, key(3, Role::Data).rng(10).next_u64());
    }
}
