//! Simulation library for the multi-player multi-armed bandit problem where
//! players' reward means differ by at most a dissimilarity `eps`.
//!
//! - [`env`]: problem instances, reward sampling, the random instance
//!   generator and gap diagnostics.
//! - [`policies`]: the weighted own/auxiliary estimator, RobustAgg and its
//!   presets, and independent UCB-1.
//! - [`corral`]: the dissimilarity-agnostic Corral master over a grid of
//!   RobustAgg base learners.
//! - [`harness`]: seeded episodes, replications, sweeps and result output.

pub mod corral;
pub mod env;
pub mod error;
pub mod harness;
pub mod policies;
pub mod rng;

pub use corral::{logbarrier_omd_step, CorralConfig, CorralMaster, CorralOptions, CorralState, RobustAggAgnostic};
pub use env::{example1_instance, generate_instance, InstanceDiagnostics, MpmabInstance, RewardKind};
pub use error::{Error, Result};
pub use harness::{
    run_episode, run_replicated, run_sweep, ExperimentConfig, ExperimentResult, InstanceSource, RegretTrace,
    SweepConfig,
};
pub use policies::{
    kappa, lambda_star, width, Algorithm, ConfidenceParams, IndUcb, Policy, PolicySpec, Pull, PullStats,
    RobustAgg, UcbDecision,
};
