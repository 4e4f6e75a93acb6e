//! Seeded, replicated regret experiments.

pub mod config;
pub mod emit;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{example1_instance, generate_instance, MpmabInstance};
use crate::error::{Error, Result};
use crate::policies::{Policy, PolicySpec, Pull};
use crate::rng::{player_stream, replication_seed, substream, INSTANCE_STREAM, MASTER_STREAM};

pub use emit::{emit_results, read_csv_series, render_svg, OutputFormat, Series};

/// Collective pseudo-regret of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    /// Cumulative regret after each round; `cum_regret[t - 1]` covers rounds `1..=t`.
    pub cum_regret: Vec<f64>,
    /// `per_player_pulls[p][i]`: pulls of arm `i` by player `p` over the episode.
    pub per_player_pulls: Vec<Vec<u64>>,
    pub replication_seed: u64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }

    /// `sum_p sum_i gap[p][i] * pulls[p][i]`, computed from the pull counts.
    pub fn gap_weighted_pulls(&self, gaps: &[Vec<f64>]) -> f64 {
        self.per_player_pulls
            .iter()
            .zip(gaps)
            .map(|(pulls, g)| pulls.iter().zip(g).map(|(&n, d)| n as f64 * d).sum::<f64>())
            .sum()
    }
}

fn check_horizon(instance: &MpmabInstance, horizon: u64) -> Result<()> {
    let floor = instance.num_players().max(instance.num_arms()) as u64;
    if horizon <= floor {
        return Err(Error::arg(format!(
            "horizon {horizon} must exceed max(players, arms) = {floor}"
        )));
    }
    Ok(())
}

/// Simulates `horizon` synchronous rounds of `policy` on `instance`.
pub fn run_episode(instance: &MpmabInstance, policy: &mut dyn Policy, horizon: u64, seed: u64) -> Result<RegretTrace> {
    run_episode_with(instance, policy, horizon, seed, |_, _| {})
}

/// Like [`run_episode`], calling `on_round(t, pulls)` after every round.
pub fn run_episode_with<F>(
    instance: &MpmabInstance,
    policy: &mut dyn Policy,
    horizon: u64,
    seed: u64,
    mut on_round: F,
) -> Result<RegretTrace>
where
    F: FnMut(u64, &[Pull]),
{
    check_horizon(instance, horizon)?;
    let m = instance.num_players();
    let k = instance.num_arms();
    let gaps = instance.diagnostics().gaps;
    policy.start(m, k, horizon)?;

    let mut reward_streams: Vec<_> = (0..m).map(|p| player_stream(seed, p)).collect();
    let mut master = substream(seed, MASTER_STREAM);
    let mut choices = vec![0usize; m];
    let mut pulls = vec![Pull { arm: 0, reward: 0.0 }; m];
    let mut per_player_pulls = vec![vec![0u64; k]; m];
    let mut cum_regret = Vec::with_capacity(horizon as usize);
    let mut total = 0.0;

    for t in 1..=horizon {
        // Decide for everyone first; statistics only move after all rewards are in.
        policy.select(t, &mut choices, &mut master);
        for (p, (&arm, stream)) in choices.iter().zip(reward_streams.iter_mut()).enumerate() {
            let reward = instance.sample_reward(p, arm, stream)?;
            pulls[p] = Pull { arm, reward };
            per_player_pulls[p][arm] += 1;
            total += gaps[p][arm];
        }
        policy.observe(t, &pulls)?;
        on_round(t, &pulls);
        cum_regret.push(total);
    }

    Ok(RegretTrace {
        cum_regret,
        per_player_pulls,
        replication_seed: seed,
    })
}

/// Where the instance of each replication comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceSource {
    /// Fresh random instance per replication.
    Generated {
        num_players: usize,
        num_arms: usize,
        num_subpar: usize,
        eps: f64,
    },
    /// Instance file shared by all replications.
    File { path: PathBuf },
    /// Two-arm instance with gap `delta`.
    Example1 { num_players: usize, delta: f64 },
}

impl InstanceSource {
    /// Resolves the source once; `Some` for sources shared by all replications.
    fn shared(&self) -> Result<Option<MpmabInstance>> {
        match self {
            InstanceSource::Generated { .. } => Ok(None),
            InstanceSource::File { path } => MpmabInstance::load(path).map(Some),
            InstanceSource::Example1 { num_players, delta } => example1_instance(*num_players, *delta).map(Some),
        }
    }

    /// Instance used by the replication with seed `seed`.
    pub fn instance_for(&self, seed: u64) -> Result<MpmabInstance> {
        match self {
            InstanceSource::Generated {
                num_players,
                num_arms,
                num_subpar,
                eps,
            } => generate_instance(*num_players, *num_arms, *num_subpar, *eps, &mut substream(seed, INSTANCE_STREAM)),
            _ => Ok(self.shared()?.expect("non-generated source")),
        }
    }
}

/// One replicated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub horizon: u64,
    pub policy: PolicySpec,
    pub instance: InstanceSource,
    pub num_replications: usize,
    pub base_seed: u64,
    /// Dissimilarity used to count subpar arms of non-generated instances.
    pub eps: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_replications == 0 {
            return Err(Error::arg("need at least one replication"));
        }
        let (m, k) = match &self.instance {
            InstanceSource::Generated {
                num_players, num_arms, ..
            } => (*num_players, *num_arms),
            InstanceSource::Example1 { num_players, .. } => (*num_players, 2),
            InstanceSource::File { .. } => (0, 0),
        };
        if self.horizon <= m.max(k) as u64 {
            return Err(Error::arg(format!(
                "horizon {} must exceed max(players, arms) = {}",
                self.horizon,
                m.max(k)
            )));
        }
        Ok(())
    }
}

/// Rounds at which traces are recorded: every `T / 1000` rounds plus round `T`.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let step = (horizon / 1000).max(1);
    let mut out: Vec<u64> = (1..=horizon / step).map(|j| j * step).collect();
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Pointwise mean and standard error of equally long series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Aggregate {
    pub fn from_series<'a, I>(series: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let series: Vec<&[f64]> = series.into_iter().collect();
        let Some(len) = series.first().map(|s| s.len()) else {
            return Aggregate::default();
        };
        let n = series.len() as f64;
        let mut mean = vec![0.0; len];
        let mut stderr = vec![0.0; len];
        for j in 0..len {
            let mu = series.iter().map(|s| s[j]).sum::<f64>() / n;
            mean[j] = mu;
            if series.len() > 1 {
                let var = series.iter().map(|s| (s[j] - mu).powi(2)).sum::<f64>() / (n - 1.0);
                stderr[j] = (var / n).sqrt();
            }
        }
        Aggregate { mean, stderr }
    }
}

/// Per-replication summary kept after the full trace is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub index: usize,
    pub seed: u64,
    /// Cumulative regret at each checkpoint.
    pub values: Vec<f64>,
    pub per_player_pulls: Vec<Vec<u64>>,
}

impl ReplicationSummary {
    pub fn final_regret(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Outcome of [`run_replicated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub num_players: usize,
    pub num_arms: usize,
    /// Subpar-arm count of the instances (the generator target, or counted at `config.eps`).
    pub num_subpar: usize,
    pub checkpoints: Vec<u64>,
    pub replications: Vec<ReplicationSummary>,
    pub aggregate: Aggregate,
}

impl ExperimentResult {
    pub fn mean_final_regret(&self) -> f64 {
        self.aggregate.mean.last().copied().unwrap_or(0.0)
    }

    pub fn algorithm(&self) -> &str {
        self.config.policy.algorithm.as_str()
    }
}

/// How replications are scheduled. Both produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Runs every replication of `config` and aggregates at the checkpoints.
pub fn run_replicated(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_replicated_with(config, Execution::Parallel)
}

pub fn run_replicated_with(config: &ExperimentConfig, execution: Execution) -> Result<ExperimentResult> {
    config.validate()?;
    let shared = config.instance.shared()?;
    let marks = checkpoints(config.horizon);

    let run_one = |index: usize| -> Result<(ReplicationSummary, MpmabInstance)> {
        let seed = replication_seed(config.base_seed, index);
        let instance = match &shared {
            Some(instance) => instance.clone(),
            None => config.instance.instance_for(seed)?,
        };
        let mut policy = config.policy.build()?;
        let trace = run_episode(&instance, policy.as_mut(), config.horizon, seed)?;
        let values = marks.iter().map(|&t| trace.cum_regret[t as usize - 1]).collect();
        Ok((
            ReplicationSummary {
                index,
                seed,
                values,
                per_player_pulls: trace.per_player_pulls,
            },
            instance,
        ))
    };

    let outcomes: Vec<Result<_>> = match execution {
        Execution::Serial => (0..config.num_replications).map(run_one).collect(),
        Execution::Parallel => (0..config.num_replications).into_par_iter().map(run_one).collect(),
    };
    let mut replications = Vec::with_capacity(outcomes.len());
    let mut first_instance = None;
    for outcome in outcomes {
        let (summary, instance) = outcome?;
        first_instance.get_or_insert(instance);
        replications.push(summary);
    }
    let instance = first_instance.expect("at least one replication");
    let num_subpar = match &config.instance {
        InstanceSource::Generated { num_subpar, .. } => *num_subpar,
        _ => instance.subpar_arms(config.eps)?.len(),
    };
    let aggregate = Aggregate::from_series(replications.iter().map(|r| r.values.as_slice()));
    Ok(ExperimentResult {
        config: config.clone(),
        num_players: instance.num_players(),
        num_arms: instance.num_arms(),
        num_subpar,
        checkpoints: marks,
        replications,
        aggregate,
    })
}

/// Cross product of algorithms, player counts and subpar-arm counts over
/// generated instances. Algorithms sharing a setting see the same instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub algorithms: Vec<PolicySpec>,
    pub num_players: Vec<usize>,
    pub num_arms: usize,
    pub num_subpar: Vec<usize>,
    pub eps: f64,
    pub horizon: u64,
    pub num_replications: usize,
    pub base_seed: u64,
}

impl SweepConfig {
    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &num_players in &self.num_players {
            for &num_subpar in &self.num_subpar {
                for policy in &self.algorithms {
                    out.push(ExperimentConfig {
                        horizon: self.horizon,
                        policy: policy.clone(),
                        instance: InstanceSource::Generated {
                            num_players,
                            num_arms: self.num_arms,
                            num_subpar,
                            eps: self.eps,
                        },
                        num_replications: self.num_replications,
                        base_seed: self.base_seed,
                        eps: self.eps,
                    });
                }
            }
        }
        out
    }
}

pub fn run_sweep(sweep: &SweepConfig) -> Result<Vec<ExperimentResult>> {
    sweep.experiments().iter().map(run_replicated).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::RewardKind;
    use crate::policies::{Algorithm, IndUcb};

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(5), vec![1, 2, 3, 4, 5]);
        let c = checkpoints(100_000);
        assert_eq!(c.len(), 1000);
        assert_eq!((c[0], *c.last().unwrap()), (100, 100_000));
        let c = checkpoints(2_500);
        assert_eq!((c[0], c.len(), *c.last().unwrap()), (2, 1250, 2_500));
        assert_eq!(*checkpoints(2_501).last().unwrap(), 2_501);
    }

    #[test]
    fn horizon_must_exceed_shape() {
        let inst = MpmabInstance::new(vec![vec![0.5; 4]; 3], RewardKind::PointMass).unwrap();
        let mut policy = IndUcb::default();
        assert!(run_episode(&inst, &mut policy, 4, 0).is_err());
        assert!(run_episode(&inst, &mut policy, 5, 0).is_ok());
    }

    #[test]
    fn single_replication_has_zero_stderr() {
        let agg = Aggregate::from_series([[1.0, 2.0, 4.0].as_slice()]);
        assert_eq!(agg.mean, vec![1.0, 2.0, 4.0]);
        assert_eq!(agg.stderr, vec![0.0; 3]);
        let agg = Aggregate::from_series([[1.0].as_slice(), [3.0].as_slice()]);
        assert_eq!(agg.mean, vec![2.0]);
        assert!((agg.stderr[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig {
            horizon: 10,
            policy: PolicySpec::new(Algorithm::IndUcb, 0.1),
            instance: InstanceSource::Example1 {
                num_players: 12,
                delta: 0.1,
            },
            num_replications: 1,
            base_seed: 0,
            eps: 0.1,
        };
        assert!(cfg.validate().is_err());
        cfg.horizon = 13;
        assert!(cfg.validate().is_ok());
        cfg.num_replications = 0;
        assert!(cfg.validate().is_err());
    }
}
