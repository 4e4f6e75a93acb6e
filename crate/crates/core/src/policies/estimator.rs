//! Weighted own/auxiliary reward estimates and their confidence widths.
//!
//! For a player and an arm the estimator mixes the player's own sample mean
//! with the mean of every other player's samples on that arm:
//!
//! ```text
//! kappa(l) = l * own_mean + (1 - l) * other_mean
//! F(n, m, l) = c * sqrt(rho * ln T * (l^2 / n + (1 - l)^2 / m)) + (1 - l) * eps
//! ```
//!
//! The first term of `F` bounds the deviation of `kappa` from its expectation;
//! the second bounds the bias introduced by players whose means differ by up
//! to `eps`. `lambda_star` picks the weight minimizing `F` in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `8 * sqrt(13)`, the coefficient backed by the concentration analysis.
pub const THEORY_COEFF: f64 = 8.0 * 3.605_551_275_463_989;
/// `sqrt(2)`, the UCB-1 coefficient used by the adapted variant.
pub const ADAPTED_COEFF: f64 = std::f64::consts::SQRT_2;

/// Running pull counts and reward sums of one player on one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PullStats {
    /// Pulls of this arm by the player.
    pub own_count: u64,
    pub own_sum: f64,
    /// Pulls of this arm by every other player.
    pub other_count: u64,
    pub other_sum: f64,
}

impl PullStats {
    /// `max(1, own_count)`
    pub fn own_bar(&self) -> u64 {
        self.own_count.max(1)
    }

    /// `max(1, other_count)`
    pub fn other_bar(&self) -> u64 {
        self.other_count.max(1)
    }
}

/// Parameters of the confidence width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams {
    coeff: f64,
    ln_horizon: f64,
    eps: f64,
    rho: f64,
}

impl ConfidenceParams {
    pub fn new(coeff: f64, ln_horizon: f64, eps: f64, rho: f64) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(Error::arg(format!("coefficient must be positive, got {coeff}")));
        }
        if !(ln_horizon > 0.0 && ln_horizon.is_finite()) {
            return Err(Error::arg(format!("ln T must be positive, got {ln_horizon}")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::arg(format!("eps must be non-negative, got {eps}")));
        }
        if !(rho >= 1.0 && rho.is_finite()) {
            return Err(Error::arg(format!("rho must be at least 1, got {rho}")));
        }
        Ok(ConfidenceParams {
            coeff,
            ln_horizon,
            eps,
            rho,
        })
    }

    /// Params for horizon `T` with `rho = 1`.
    pub fn for_horizon(coeff: f64, horizon: u64, eps: f64) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::arg(format!("horizon must be at least 2, got {horizon}")));
        }
        Self::new(coeff, (horizon as f64).ln(), eps, 1.0)
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn ln_horizon(&self) -> f64 {
        self.ln_horizon
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn with_rho(self, rho: f64) -> Result<Self> {
        Self::new(self.coeff, self.ln_horizon, self.eps, rho)
    }

    /// `c^2 * rho * ln T`, the scale shared by width and weight.
    fn scale(&self) -> f64 {
        self.coeff * self.coeff * self.rho * self.ln_horizon
    }
}

/// Weight on own samples minimizing the width, in closed form.
pub fn lambda_star(n_bar: u64, m_bar: u64, params: &ConfidenceParams) -> f64 {
    debug_assert!(n_bar >= 1 && m_bar >= 1);
    let n = n_bar as f64;
    let m = m_bar as f64;
    let eps = params.eps;
    let scale = params.scale();
    if eps > 0.0 && n >= scale / (eps * eps) {
        return 1.0;
    }
    let denom = scale * (n + m) - eps * eps * n * m;
    // Positive whenever n < scale / eps^2, i.e. whenever the branch above did not fire.
    debug_assert!(denom > 0.0, "lambda_star branch ordering violated");
    if denom <= 0.0 {
        return 1.0;
    }
    let lambda = n / (n + m) * (1.0 + eps * m * (1.0 / denom).sqrt());
    lambda.min(1.0)
}

/// Confidence width `F(n_bar, m_bar, lambda)`.
pub fn width(n_bar: u64, m_bar: u64, lambda: f64, params: &ConfidenceParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::arg(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(width_unchecked(n_bar, m_bar, lambda, params))
}

#[inline]
pub(crate) fn width_unchecked(n_bar: u64, m_bar: u64, lambda: f64, params: &ConfidenceParams) -> f64 {
    let own = lambda * lambda / n_bar as f64;
    let other = (1.0 - lambda) * (1.0 - lambda) / m_bar as f64;
    params.coeff * (params.rho * params.ln_horizon * (own + other)).sqrt() + (1.0 - lambda) * params.eps
}

/// Mixed mean estimate `lambda * own_mean + (1 - lambda) * other_mean`.
pub fn kappa(stats: &PullStats, lambda: f64) -> f64 {
    let own_mean = stats.own_sum / stats.own_bar() as f64;
    let other_mean = stats.other_sum / stats.other_bar() as f64;
    lambda * own_mean + (1.0 - lambda) * other_mean
}

/// One player's reward in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pull {
    pub arm: usize,
    pub reward: f64,
}

/// `PullStats` for every (player, arm) pair of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    num_players: usize,
    num_arms: usize,
    cells: Vec<PullStats>,
}

impl StatsTable {
    pub fn new(num_players: usize, num_arms: usize) -> Self {
        StatsTable {
            num_players,
            num_arms,
            cells: vec![PullStats::default(); num_players * num_arms],
        }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    /// Per-arm statistics of one player.
    pub fn player(&self, player: usize) -> &[PullStats] {
        &self.cells[player * self.num_arms..(player + 1) * self.num_arms]
    }

    pub fn get(&self, player: usize, arm: usize) -> &PullStats {
        &self.cells[player * self.num_arms + arm]
    }

    pub fn clear(&mut self) {
        self.cells.fill(PullStats::default());
    }

    /// Folds one round of pulls (one per player) into the table.
    ///
    /// Each pull counts as own data for its player and as auxiliary data for
    /// every other player on the same arm.
    pub fn update(&mut self, pulls: &[Pull]) -> Result<()> {
        if pulls.len() != self.num_players {
            return Err(Error::arg(format!(
                "expected {} pulls, got {}",
                self.num_players,
                pulls.len()
            )));
        }
        if let Some(bad) = pulls.iter().find(|pull| pull.arm >= self.num_arms) {
            return Err(Error::Index {
                what: "arm",
                index: bad.arm,
                limit: self.num_arms,
            });
        }
        for (p, pull) in pulls.iter().enumerate() {
            for q in 0..self.num_players {
                let cell = &mut self.cells[q * self.num_arms + pull.arm];
                if q == p {
                    cell.own_count += 1;
                    cell.own_sum += pull.reward;
                } else {
                    cell.other_count += 1;
                    cell.other_sum += pull.reward;
                }
            }
        }
        Ok(())
    }
}
