//! Independent UCB-1: each player learns alone from its own pulls.

use crate::error::{Error, Result};
use crate::policies::estimator::{Pull, PullStats, StatsTable};
use crate::policies::{argmax, Policy, UcbDecision};
use crate::rng::SimRng;

/// Default constant inside the UCB-1 bonus `sqrt(bonus * ln t / n)`.
pub const UCB1_BONUS: f64 = 2.0;

/// UCB-1 decision from a player's own statistics in round `round` (1-based).
///
/// Untried arms are pulled first, lowest index first. Auxiliary fields of
/// `own_stats` are ignored.
pub fn inducb_select(own_stats: &[PullStats], round: u64, bonus: f64) -> UcbDecision {
    let per_arm_ucb: Vec<f64> = own_stats
        .iter()
        .map(|s| {
            if s.own_count == 0 {
                f64::INFINITY
            } else {
                ucb1_index(s, round, bonus)
            }
        })
        .collect();
    let chosen_arm = match own_stats.iter().position(|s| s.own_count == 0) {
        Some(untried) => untried,
        None => argmax(per_arm_ucb.iter().copied()),
    };
    UcbDecision {
        chosen_arm,
        per_arm_lambda: vec![1.0; own_stats.len()],
        per_arm_ucb,
    }
}

#[inline]
fn ucb1_index(s: &PullStats, round: u64, bonus: f64) -> f64 {
    let n = s.own_count as f64;
    s.own_sum / n + (bonus * (round as f64).ln() / n).sqrt()
}

fn inducb_choose(own_stats: &[PullStats], round: u64, bonus: f64) -> usize {
    if let Some(untried) = own_stats.iter().position(|s| s.own_count == 0) {
        return untried;
    }
    argmax(own_stats.iter().map(|s| ucb1_index(s, round, bonus)))
}

/// Players run UCB-1 independently and ignore shared data.
#[derive(Debug, Clone)]
pub struct IndUcb {
    bonus: f64,
    stats: StatsTable,
}

impl IndUcb {
    pub fn new(bonus: f64) -> Result<Self> {
        if !(bonus > 0.0 && bonus.is_finite()) {
            return Err(Error::arg(format!("bonus constant must be positive, got {bonus}")));
        }
        Ok(IndUcb {
            bonus,
            stats: StatsTable::new(0, 0),
        })
    }

    pub fn bonus(&self) -> f64 {
        self.bonus
    }
}

impl Default for IndUcb {
    fn default() -> Self {
        IndUcb::new(UCB1_BONUS).expect("default bonus is valid")
    }
}

impl Policy for IndUcb {
    fn name(&self) -> &str {
        "ind-ucb"
    }

    fn start(&mut self, num_players: usize, num_arms: usize, _horizon: u64) -> Result<()> {
        self.stats = StatsTable::new(num_players, num_arms);
        Ok(())
    }

    fn select(&mut self, round: u64, choices: &mut [usize], _rng: &mut SimRng) {
        for (p, choice) in choices.iter_mut().enumerate() {
            *choice = inducb_choose(self.stats.player(p), round, self.bonus);
        }
    }

    fn observe(&mut self, _round: u64, pulls: &[Pull]) -> Result<()> {
        self.stats.update(pulls)
    }
}
