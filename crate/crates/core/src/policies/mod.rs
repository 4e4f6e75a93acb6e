//! Arm-selection policies and the estimators behind them.

pub mod estimator;
pub mod inducb;
pub mod robustagg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corral::{CorralOptions, RobustAggAgnostic};
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub use estimator::{
    kappa, lambda_star, width, ConfidenceParams, Pull, PullStats, StatsTable, ADAPTED_COEFF, THEORY_COEFF,
};
pub use inducb::{inducb_select, IndUcb, UCB1_BONUS};
pub use robustagg::{robustagg_select, RobustAgg};

/// Scores and choice of one player in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbDecision {
    pub chosen_arm: usize,
    pub per_arm_ucb: Vec<f64>,
    pub per_arm_lambda: Vec<f64>,
}

/// Index of the largest value; ties go to the lowest index.
#[inline]
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// A multi-player learner driven round by round by the simulator.
///
/// Within a round the simulator calls `select` once for all players, draws the
/// rewards, then calls `observe`. Nothing from round `t` is visible to `select`
/// in round `t`.
pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Resets the policy for a fresh episode of `horizon` rounds.
    fn start(&mut self, num_players: usize, num_arms: usize, horizon: u64) -> Result<()>;

    /// Writes one arm per player into `choices` for round `round` (1-based).
    fn select(&mut self, round: u64, choices: &mut [usize], rng: &mut SimRng);

    /// Feeds back the pulls of round `round`, one per player.
    fn observe(&mut self, round: u64, pulls: &[Pull]) -> Result<()>;
}

/// Named policy presets selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "robustagg")]
    RobustAgg,
    #[serde(rename = "robustagg-adapted")]
    RobustAggAdapted,
    #[serde(rename = "naive-agg")]
    NaiveAgg,
    #[serde(rename = "ind-ucb")]
    IndUcb,
    #[serde(rename = "robustagg-agnostic")]
    RobustAggAgnostic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::RobustAgg,
        Algorithm::RobustAggAdapted,
        Algorithm::NaiveAgg,
        Algorithm::IndUcb,
        Algorithm::RobustAggAgnostic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::RobustAgg => "robustagg",
            Algorithm::RobustAggAdapted => "robustagg-adapted",
            Algorithm::NaiveAgg => "naive-agg",
            Algorithm::IndUcb => "ind-ucb",
            Algorithm::RobustAggAgnostic => "robustagg-agnostic",
        }
    }

    /// Whether the preset consumes a dissimilarity parameter.
    pub fn uses_eps(self) -> bool {
        matches!(self, Algorithm::RobustAgg | Algorithm::RobustAggAdapted)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
                Error::arg(format!("unknown algorithm {s:?}; expected one of {}", known.join(", ")))
            })
    }
}

/// A preset plus the parameters needed to instantiate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub algorithm: Algorithm,
    /// Dissimilarity handed to the RobustAgg presets.
    pub eps: f64,
    /// UCB-1 bonus constant for ind-ucb.
    #[serde(default = "default_bonus")]
    pub ucb_bonus: f64,
    #[serde(default)]
    pub corral: CorralOptions,
}

fn default_bonus() -> f64 {
    UCB1_BONUS
}

impl PolicySpec {
    pub fn new(algorithm: Algorithm, eps: f64) -> Self {
        PolicySpec {
            algorithm,
            eps,
            ucb_bonus: UCB1_BONUS,
            corral: CorralOptions::default(),
        }
    }

    /// Dissimilarity the built policy actually assumes.
    pub fn effective_eps(&self) -> Option<f64> {
        match self.algorithm {
            Algorithm::RobustAgg | Algorithm::RobustAggAdapted => Some(self.eps),
            Algorithm::NaiveAgg => Some(0.0),
            Algorithm::IndUcb | Algorithm::RobustAggAgnostic => None,
        }
    }

    /// Short series label such as `robustagg-adapted(0.15)`.
    pub fn label(&self) -> String {
        if self.algorithm.uses_eps() {
            format!("{}({})", self.algorithm, self.eps)
        } else {
            self.algorithm.to_string()
        }
    }

    pub fn build(&self) -> Result<Box<dyn Policy>> {
        Ok(match self.algorithm {
            Algorithm::RobustAgg => Box::new(RobustAgg::theory(self.eps)?),
            Algorithm::RobustAggAdapted => Box::new(RobustAgg::adapted(self.eps)?),
            Algorithm::NaiveAgg => Box::new(RobustAgg::naive_agg()),
            Algorithm::IndUcb => Box::new(IndUcb::new(self.ucb_bonus)?),
            Algorithm::RobustAggAgnostic => Box::new(RobustAggAgnostic::new(self.corral.clone())?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax([f64::INFINITY, f64::INFINITY]), 0);
        assert_eq!(argmax(std::iter::empty()), 0);
    }

    #[test]
    fn preset_names_round_trip() {
        for algo in Algorithm::ALL {
            assert_eq!(algo.as_str().parse::<Algorithm>().unwrap(), algo);
            let json = serde_json::to_string(&algo).unwrap();
            assert_eq!(json, format!("\"{}\"", algo.as_str()));
        }
        assert!("ucb".parse::<Algorithm>().is_err());
    }

    #[test]
    fn specs_build_named_policies() {
        for algo in Algorithm::ALL {
            let policy = PolicySpec::new(algo, 0.15).build().unwrap();
            assert_eq!(policy.name(), algo.as_str());
        }
        assert_eq!(PolicySpec::new(Algorithm::RobustAggAdapted, 0.15).label(), "robustagg-adapted(0.15)");
        assert_eq!(PolicySpec::new(Algorithm::NaiveAgg, 0.15).effective_eps(), Some(0.0));
    }
}
