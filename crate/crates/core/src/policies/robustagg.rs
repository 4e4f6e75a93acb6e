//! Robust cross-player aggregation: every player scores each arm with the
//! tightest weighted own/auxiliary confidence bound and pulls the best one.

use crate::error::{Error, Result};
use crate::policies::estimator::{
    kappa, lambda_star, width_unchecked, ConfidenceParams, Pull, PullStats, StatsTable, ADAPTED_COEFF,
    THEORY_COEFF,
};
use crate::policies::{argmax, Policy, UcbDecision};
use crate::rng::SimRng;

/// Upper confidence bound of one arm and the weight that produced it.
#[inline]
pub fn robustagg_ucb(stats: &PullStats, params: &ConfidenceParams) -> (f64, f64) {
    let n_bar = stats.own_bar();
    let m_bar = stats.other_bar();
    let lambda = lambda_star(n_bar, m_bar, params);
    (kappa(stats, lambda) + width_unchecked(n_bar, m_bar, lambda, params), lambda)
}

/// Scores every arm of one player and picks the highest bound.
pub fn robustagg_select(all_stats: &[PullStats], params: &ConfidenceParams) -> UcbDecision {
    let (per_arm_ucb, per_arm_lambda): (Vec<f64>, Vec<f64>) =
        all_stats.iter().map(|s| robustagg_ucb(s, params)).unzip();
    UcbDecision {
        chosen_arm: argmax(per_arm_ucb.iter().copied()),
        per_arm_ucb,
        per_arm_lambda,
    }
}

/// Allocation-free variant of [`robustagg_select`] returning only the arm.
#[inline]
pub fn robustagg_choose(all_stats: &[PullStats], params: &ConfidenceParams) -> usize {
    argmax(all_stats.iter().map(|s| robustagg_ucb(s, params).0))
}

/// Multi-player policy built on [`robustagg_select`].
#[derive(Debug, Clone)]
pub struct RobustAgg {
    name: String,
    coeff: f64,
    eps: f64,
    rho: f64,
    params: Option<ConfidenceParams>,
    stats: StatsTable,
}

impl RobustAgg {
    pub fn new(name: impl Into<String>, coeff: f64, eps: f64) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(Error::arg(format!("coefficient must be positive, got {coeff}")));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::arg(format!("eps must lie in [0, 1], got {eps}")));
        }
        Ok(RobustAgg {
            name: name.into(),
            coeff,
            eps,
            rho: 1.0,
            params: None,
            stats: StatsTable::new(0, 0),
        })
    }

    /// Coefficient `8 sqrt(13)` from the concentration analysis.
    pub fn theory(eps: f64) -> Result<Self> {
        Self::new("robustagg", THEORY_COEFF, eps)
    }

    /// Coefficient `sqrt(2)`, as in UCB-1.
    pub fn adapted(eps: f64) -> Result<Self> {
        Self::new("robustagg-adapted", ADAPTED_COEFF, eps)
    }

    /// Full pooling: the adapted variant with `eps = 0`.
    pub fn naive_agg() -> Self {
        Self::new("naive-agg", ADAPTED_COEFF, 0.0).expect("static parameters are valid")
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn params(&self) -> Option<&ConfidenceParams> {
        self.params.as_ref()
    }

    pub fn stats(&self) -> &StatsTable {
        &self.stats
    }

    /// Sets the importance-weighting scale used by the widths.
    pub fn set_rho(&mut self, rho: f64) -> Result<()> {
        if let Some(params) = self.params {
            self.params = Some(params.with_rho(rho)?);
        } else if !(rho >= 1.0 && rho.is_finite()) {
            return Err(Error::arg(format!("rho must be at least 1, got {rho}")));
        }
        self.rho = rho;
        Ok(())
    }

    /// Forgets all observed pulls.
    pub fn clear_stats(&mut self) {
        self.stats.clear();
    }

    /// Arm each player would pull given the current statistics.
    pub fn propose(&self, choices: &mut [usize]) {
        let params = self.params.as_ref().expect("policy used before start");
        for (p, choice) in choices.iter_mut().enumerate() {
            *choice = robustagg_choose(self.stats.player(p), params);
        }
    }

    pub fn decision(&self, player: usize) -> UcbDecision {
        let params = self.params.as_ref().expect("policy used before start");
        robustagg_select(self.stats.player(player), params)
    }
}

impl Policy for RobustAgg {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&mut self, num_players: usize, num_arms: usize, horizon: u64) -> Result<()> {
        let params = ConfidenceParams::for_horizon(self.coeff, horizon, self.eps)?.with_rho(self.rho)?;
        self.params = Some(params);
        self.stats = StatsTable::new(num_players, num_arms);
        Ok(())
    }

    fn select(&mut self, _round: u64, choices: &mut [usize], _rng: &mut SimRng) {
        self.propose(choices);
    }

    fn observe(&mut self, _round: u64, pulls: &[Pull]) -> Result<()> {
        self.stats.update(pulls)
    }
}
