//! Seeded random streams.
//!
//! Every replication owns a 64-bit seed. Independent substreams are carved out
//! of it with ChaCha's 64-bit stream selector, so the reward sequence a player
//! sees never depends on how many draws another consumer made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// Substream used to draw a generated instance.
pub const INSTANCE_STREAM: u64 = 0;
/// Substream used by meta-algorithms for their own randomization.
pub const MASTER_STREAM: u64 = 1;
const PLAYER_STREAM_BASE: u64 = 1 << 32;

/// Opens substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Reward stream for one player within one replication.
pub fn player_stream(seed: u64, player: usize) -> SimRng {
    substream(seed, PLAYER_STREAM_BASE + player as u64)
}

/// Seed of replication `index` derived from the experiment's base seed.
pub fn replication_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let draw = |mut rng: SimRng| -> Vec<u64> { (0..8).map(|_| rng.random()).collect() };
        assert_eq!(draw(substream(5, 3)), draw(substream(5, 3)));
        assert_ne!(draw(substream(5, 3)), draw(substream(5, 4)));
        assert_ne!(draw(player_stream(5, 0)), draw(player_stream(5, 1)));
    }
}
