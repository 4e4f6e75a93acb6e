//! Dissimilarity-agnostic aggregation.
//!
//! A Corral master runs log-barrier online mirror descent over a grid of
//! [`RobustAgg`] base learners, one per guess `eps_b = 2^(1-b)`. Each round
//! every base learner proposes an arm per player, the master samples one
//! learner and plays its proposal, and only that learner is fed the rewards,
//! scaled up by the inverse of its selection probability. A learner whose
//! probability drops below `1 / rho_b` is restarted with a larger `rho_b`,
//! which widens its confidence intervals to cover the heavier-tailed
//! importance-weighted rewards.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::{Policy, Pull, RobustAgg, ADAPTED_COEFF};
use crate::rng::SimRng;

/// User-facing knobs of the agnostic algorithm. `None` picks the default
/// derived from the number of players and the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorralOptions {
    /// Width coefficient of every base learner.
    pub coeff: f64,
    /// Number of base learners `B`.
    pub num_base: Option<usize>,
    /// Master learning rate `eta`.
    pub master_lr: Option<f64>,
    /// Uniform mixing weight `gamma`.
    pub mix_gamma: Option<f64>,
    /// Learning-rate multiplier `beta` applied on every restart.
    pub lr_growth: Option<f64>,
    /// Divide the master's loss by the number of players.
    pub normalize_loss: bool,
}

impl Default for CorralOptions {
    fn default() -> Self {
        CorralOptions {
            coeff: ADAPTED_COEFF,
            num_base: None,
            master_lr: None,
            mix_gamma: None,
            lr_growth: None,
            normalize_loss: false,
        }
    }
}

/// Resolved configuration for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct CorralConfig {
    pub num_base: usize,
    pub eps_grid: Vec<f64>,
    pub master_lr: f64,
    pub mix_gamma: f64,
    pub lr_growth: f64,
    pub coeff: f64,
    pub normalize_loss: bool,
}

impl CorralConfig {
    pub fn new(num_players: usize, horizon: u64, options: &CorralOptions) -> Result<Self> {
        if num_players == 0 || horizon < 2 {
            return Err(Error::arg("corral needs at least one player and a horizon of at least 2"));
        }
        let (m, t) = (num_players as f64, horizon as f64);
        let num_base = match options.num_base {
            Some(0) => return Err(Error::arg("corral needs at least one base learner")),
            Some(b) => b,
            None => (m * t).log2().ceil() as usize + 1,
        };
        let eps_grid = (0..num_base).map(|b| 0.5f64.powi(b as i32)).collect();
        let master_lr = options.master_lr.unwrap_or(1.0 / (m * t.sqrt()));
        let mix_gamma = options.mix_gamma.unwrap_or(1.0 / t);
        let lr_growth = options.lr_growth.unwrap_or((1.0 / t.ln()).exp());
        if !(master_lr > 0.0 && master_lr.is_finite()) {
            return Err(Error::arg(format!("master learning rate must be positive, got {master_lr}")));
        }
        if !(0.0..1.0).contains(&mix_gamma) {
            return Err(Error::arg(format!("mixing weight must lie in [0, 1), got {mix_gamma}")));
        }
        if !(lr_growth >= 1.0 && lr_growth.is_finite()) {
            return Err(Error::arg(format!("learning-rate growth must be at least 1, got {lr_growth}")));
        }
        Ok(CorralConfig {
            num_base,
            eps_grid,
            master_lr,
            mix_gamma,
            lr_growth,
            coeff: options.coeff,
            normalize_loss: options.normalize_loss,
        })
    }
}

/// One log-barrier mirror-descent step followed by uniform mixing.
///
/// Finds the normalizer `nu` with `sum_b q'_b = 1` where
/// `1 / q'_b = 1 / q_b + lr_b * (loss_b - nu)`, then returns
/// `(1 - gamma) q' + gamma / B`.
pub fn logbarrier_omd_step(q: &[f64], loss: &[f64], lr: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let b = q.len();
    if b == 0 || loss.len() != b || lr.len() != b {
        return Err(Error::arg("q, loss and lr must be non-empty and of equal length"));
    }
    if q.iter().any(|&x| !(x > 0.0)) || lr.iter().any(|&x| !(x > 0.0)) || loss.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("q and lr must be positive and losses finite"));
    }
    let lo_loss = loss.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_loss = loss.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let next = if lo_loss == hi_loss {
        q.to_vec()
    } else {
        let pole = (0..b)
            .map(|j| loss[j] + 1.0 / (lr[j] * q[j]))
            .fold(f64::INFINITY, f64::min);
        let mass = |nu: f64| -> f64 {
            let mut total = 0.0;
            for j in 0..b {
                let inv = 1.0 / q[j] + lr[j] * (loss[j] - nu);
                if inv <= 0.0 {
                    return f64::INFINITY;
                }
                total += 1.0 / inv;
            }
            total
        };
        // mass(min loss) <= 1 <= mass(max loss), and mass blows up at the pole.
        let mut lo = lo_loss;
        let mut hi = hi_loss.min(pole);
        let mut nu = lo;
        let mut residual = mass(lo) - 1.0;
        for _ in 0..200 {
            if residual.abs() <= 1e-12 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let r = mass(mid) - 1.0;
            if r > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if r.abs() < residual.abs() || !residual.is_finite() {
                nu = mid;
                residual = r;
            }
        }
        if !(residual.abs() <= 1e-9) {
            return Err(Error::Numeric(format!(
                "log-barrier normalizer did not converge (residual {residual:e})"
            )));
        }
        let raw: Vec<f64> = (0..b)
            .map(|j| 1.0 / (1.0 / q[j] + lr[j] * (loss[j] - nu)))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    };
    let floor = gamma / b as f64;
    let mixed: Vec<f64> = next.into_iter().map(|x| (1.0 - gamma) * x + floor).collect();
    let total: f64 = mixed.iter().sum();
    Ok(mixed.into_iter().map(|x| x / total).collect())
}

/// Sampling distribution, learning rates and restart bookkeeping of the master.
#[derive(Debug, Clone, PartialEq)]
pub struct CorralMaster {
    pub q: Vec<f64>,
    pub per_learner_lr: Vec<f64>,
    pub rho: Vec<f64>,
    pub restart_count: Vec<u32>,
    rho_cap: f64,
    mix_gamma: f64,
    lr_growth: f64,
}

impl CorralMaster {
    pub fn new(num_base: usize, horizon: u64, master_lr: f64, mix_gamma: f64, lr_growth: f64) -> Self {
        let b = num_base as f64;
        CorralMaster {
            q: vec![1.0 / b; num_base],
            per_learner_lr: vec![master_lr; num_base],
            rho: vec![2.0 * b; num_base],
            restart_count: vec![0; num_base],
            rho_cap: b * horizon as f64,
            mix_gamma,
            lr_growth,
        }
    }

    pub fn from_config(config: &CorralConfig, horizon: u64) -> Self {
        Self::new(config.num_base, horizon, config.master_lr, config.mix_gamma, config.lr_growth)
    }

    pub fn num_base(&self) -> usize {
        self.q.len()
    }

    /// `B * T`, the largest value any `rho_b` may take.
    pub fn rho_cap(&self) -> f64 {
        self.rho_cap
    }

    /// Draws a learner index from `q`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (b, &p) in self.q.iter().enumerate() {
            acc += p;
            if u < acc {
                return b;
            }
        }
        self.q.len() - 1
    }

    /// Applies the importance-weighted loss of the played learner and runs the
    /// restart check for every learner. Returns the learners that restarted.
    pub fn update(&mut self, played: usize, loss: f64) -> Result<Vec<usize>> {
        let mut losses = vec![0.0; self.num_base()];
        losses[played] = loss / self.q[played];
        self.q = logbarrier_omd_step(&self.q, &losses, &self.per_learner_lr, self.mix_gamma)?;
        Ok((0..self.num_base()).filter(|&b| self.maybe_restart(b)).collect())
    }

    /// Doubles `rho_b` (rounding `2 / q_b` up along the doubling ladder) when
    /// `1 / q_b` exceeds it. Returns whether learner `b` restarted.
    pub fn maybe_restart(&mut self, b: usize) -> bool {
        let inv = 1.0 / self.q[b];
        if inv <= self.rho[b] || self.rho[b] >= self.rho_cap {
            return false;
        }
        let mut rho = self.rho[b];
        while rho < 2.0 * inv {
            rho *= 2.0;
        }
        self.rho[b] = rho.min(self.rho_cap);
        self.per_learner_lr[b] *= self.lr_growth;
        self.restart_count[b] += 1;
        true
    }
}

/// Full state of the agnostic algorithm: master plus base learners.
#[derive(Debug, Clone)]
pub struct CorralState {
    pub config: CorralConfig,
    pub master: CorralMaster,
    pub base: Vec<RobustAgg>,
    proposals: Vec<Vec<usize>>,
    stale: Vec<bool>,
    played: Option<usize>,
}

impl CorralState {
    pub fn new(config: CorralConfig, num_players: usize, num_arms: usize, horizon: u64) -> Result<Self> {
        let master = CorralMaster::from_config(&config, horizon);
        let base = config
            .eps_grid
            .iter()
            .enumerate()
            .map(|(b, &eps)| {
                let mut learner = RobustAgg::new(format!("robustagg[{b}]"), config.coeff, eps)?;
                learner.set_rho(master.rho[b])?;
                learner.start(num_players, num_arms, horizon)?;
                Ok(learner)
            })
            .collect::<Result<Vec<_>>>()?;
        let b = config.num_base;
        Ok(CorralState {
            config,
            master,
            base,
            proposals: vec![vec![0; num_players]; b],
            stale: vec![true; b],
            played: None,
        })
    }

    /// Learner sampled for the current round, if any.
    pub fn played(&self) -> Option<usize> {
        self.played
    }

    /// Proposals of every learner for the coming round.
    pub fn proposals(&mut self) -> &[Vec<usize>] {
        for b in 0..self.base.len() {
            if self.stale[b] {
                self.base[b].propose(&mut self.proposals[b]);
                self.stale[b] = false;
            }
        }
        &self.proposals
    }

    /// Samples a learner and writes its proposal into `choices`.
    pub fn choose<R: Rng + ?Sized>(&mut self, choices: &mut [usize], rng: &mut R) -> usize {
        self.proposals();
        let b = self.master.sample(rng);
        choices.copy_from_slice(&self.proposals[b]);
        self.played = Some(b);
        b
    }

    /// Routes this round's rewards to the played learner and updates the master.
    pub fn feedback(&mut self, pulls: &[Pull]) -> Result<()> {
        let b = self
            .played
            .take()
            .ok_or_else(|| Error::arg("feedback without a preceding choice"))?;
        let weight = 1.0 / self.master.q[b];
        let weighted: Vec<Pull> = pulls
            .iter()
            .map(|p| Pull {
                arm: p.arm,
                reward: weight * p.reward,
            })
            .collect();
        self.base[b].observe(0, &weighted)?;
        self.stale[b] = true;

        let mut loss: f64 = pulls.iter().map(|p| 1.0 - p.reward).sum();
        if self.config.normalize_loss {
            loss /= pulls.len() as f64;
        }
        for restarted in self.master.update(b, loss)? {
            self.base[restarted].clear_stats();
            self.base[restarted].set_rho(self.master.rho[restarted])?;
            self.stale[restarted] = true;
        }
        Ok(())
    }
}

/// Runs one full round: choose, pull through `env`, feed back.
pub fn corral_round<R, F>(state: &mut CorralState, env: F, rng: &mut R) -> Result<Vec<usize>>
where
    R: Rng + ?Sized,
    F: FnOnce(&[usize]) -> Result<Vec<Pull>>,
{
    let mut choices = vec![0; state.proposals.first().map_or(0, Vec::len)];
    state.choose(&mut choices, rng);
    let pulls = env(&choices)?;
    state.feedback(&pulls)?;
    Ok(choices)
}

/// [`Policy`] wrapper building a fresh [`CorralState`] per episode.
#[derive(Debug, Clone)]
pub struct RobustAggAgnostic {
    options: CorralOptions,
    state: Option<CorralState>,
}

impl RobustAggAgnostic {
    pub fn new(options: CorralOptions) -> Result<Self> {
        if !(options.coeff > 0.0 && options.coeff.is_finite()) {
            return Err(Error::arg(format!("coefficient must be positive, got {}", options.coeff)));
        }
        Ok(RobustAggAgnostic { options, state: None })
    }

    pub fn state(&self) -> Option<&CorralState> {
        self.state.as_ref()
    }
}

impl Policy for RobustAggAgnostic {
    fn name(&self) -> &str {
        "robustagg-agnostic"
    }

    fn start(&mut self, num_players: usize, num_arms: usize, horizon: u64) -> Result<()> {
        let config = CorralConfig::new(num_players, horizon, &self.options)?;
        self.state = Some(CorralState::new(config, num_players, num_arms, horizon)?);
        Ok(())
    }

    fn select(&mut self, _round: u64, choices: &mut [usize], rng: &mut SimRng) {
        self.state
            .as_mut()
            .expect("policy used before start")
            .choose(choices, rng);
    }

    fn observe(&mut self, _round: u64, pulls: &[Pull]) -> Result<()> {
        self.state
            .as_mut()
            .ok_or_else(|| Error::arg("policy used before start"))?
            .feedback(pulls)
    }
}
