//! Shared fixtures for the benchmarks.

use mpmab_core::rng::{substream, INSTANCE_STREAM};
use mpmab_core::{generate_instance, MpmabInstance, PullStats};

/// Generated instance with the experiment-1 shape (`K = 10`, `eps = 0.15`).
pub fn experiment_instance(num_players: usize, num_subpar: usize, seed: u64) -> MpmabInstance {
    generate_instance(num_players, 10, num_subpar, 0.15, &mut substream(seed, INSTANCE_STREAM))
        .expect("valid generator parameters")
}

/// Mid-episode statistics for one player over `num_arms` arms.
pub fn warm_stats(num_arms: usize) -> Vec<PullStats> {
    (0..num_arms as u64)
        .map(|i| PullStats {
            own_count: 10 + 37 * i,
            own_sum: (5 + 20 * i) as f64,
            other_count: 200 + 700 * i,
            other_sum: (100 + 350 * i) as f64,
        })
        .collect()
}
