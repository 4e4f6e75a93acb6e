//! Problem instances for the multi-player bandit setting.
//!
//! An instance is an `M x K` table of mean rewards: row `p` holds the means
//! player `p` sees on each of the `K` shared arms. Players on the same arm do
//! not collide; everyone receives an independent draw from their own law.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dissimilarity the instance generator accepts.
pub const MAX_GENERATOR_EPS: f64 = 0.2;
/// Lower end of the interval competitive arms are drawn from.
pub const COMPETITIVE_BASE: f64 = 0.8;

/// Reward law attached to every (player, arm) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    /// Reward 1 with probability equal to the mean, 0 otherwise.
    Bernoulli,
    /// Reward equal to the mean, always.
    PointMass,
}

/// Ground truth of a multi-player bandit problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct MpmabInstance {
    num_players: usize,
    num_arms: usize,
    reward_kind: RewardKind,
    means: Vec<Vec<f64>>,
}

/// On-disk shape of an instance file.
#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    num_players: usize,
    num_arms: usize,
    reward_kind: RewardKind,
    means: Vec<Vec<f64>>,
}

impl TryFrom<InstanceDoc> for MpmabInstance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let instance = MpmabInstance::new(doc.means, doc.reward_kind)?;
        if instance.num_players != doc.num_players || instance.num_arms != doc.num_arms {
            return Err(Error::arg(format!(
                "declared shape {}x{} does not match means table {}x{}",
                doc.num_players, doc.num_arms, instance.num_players, instance.num_arms
            )));
        }
        Ok(instance)
    }
}

impl From<MpmabInstance> for InstanceDoc {
    fn from(instance: MpmabInstance) -> Self {
        InstanceDoc {
            num_players: instance.num_players,
            num_arms: instance.num_arms,
            reward_kind: instance.reward_kind,
            means: instance.means,
        }
    }
}

impl MpmabInstance {
    /// Builds an instance from a row-per-player means table.
    pub fn new(means: Vec<Vec<f64>>, reward_kind: RewardKind) -> Result<Self> {
        let num_players = means.len();
        if num_players == 0 {
            return Err(Error::arg("an instance needs at least one player"));
        }
        let num_arms = means[0].len();
        if num_arms == 0 {
            return Err(Error::arg("an instance needs at least one arm"));
        }
        for (p, row) in means.iter().enumerate() {
            if row.len() != num_arms {
                return Err(Error::arg(format!(
                    "player {p} has {} arms, expected {num_arms}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|mu| !(0.0..=1.0).contains(*mu)) {
                return Err(Error::arg(format!("mean {bad} of player {p} is outside [0, 1]")));
            }
        }
        Ok(MpmabInstance {
            num_players,
            num_arms,
            reward_kind,
            means,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn mean(&self, player: usize, arm: usize) -> Result<f64> {
        self.check(player, arm)?;
        Ok(self.means[player][arm])
    }

    fn check(&self, player: usize, arm: usize) -> Result<()> {
        if player >= self.num_players {
            return Err(Error::Index {
                what: "player",
                index: player,
                limit: self.num_players,
            });
        }
        if arm >= self.num_arms {
            return Err(Error::Index {
                what: "arm",
                index: arm,
                limit: self.num_arms,
            });
        }
        Ok(())
    }

    /// Draws one reward for `player` pulling `arm`.
    pub fn sample_reward<R: Rng + ?Sized>(&self, player: usize, arm: usize, rng: &mut R) -> Result<f64> {
        self.check(player, arm)?;
        let mu = self.means[player][arm];
        Ok(match self.reward_kind {
            RewardKind::PointMass => mu,
            RewardKind::Bernoulli => {
                if rng.random::<f64>() < mu {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// Arms some player misses the optimum on by more than `5 * eps`.
    pub fn subpar_arms(&self, eps: f64) -> Result<BTreeSet<usize>> {
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::arg(format!("eps must be non-negative, got {eps}")));
        }
        Ok(self.diagnostics().subpar_arms(eps))
    }

    /// Exact max pairwise gap between players on any arm.
    pub fn dissimilarity(&self) -> f64 {
        let mut worst = 0.0f64;
        for arm in 0..self.num_arms {
            let (lo, hi) = self
                .means
                .iter()
                .map(|row| row[arm])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), mu| (lo.min(mu), hi.max(mu)));
            worst = worst.max(hi - lo);
        }
        worst
    }

    pub fn diagnostics(&self) -> InstanceDiagnostics {
        InstanceDiagnostics::of(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format {
            path: "<string>".into(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string() + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Gap structure of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDiagnostics {
    /// Tightest `eps` for which the instance is an `eps`-instance.
    pub dissimilarity: f64,
    /// Best mean per player.
    pub optimal_means: Vec<f64>,
    /// `gaps[p][i]`: how much player `p` loses per pull of arm `i`.
    pub gaps: Vec<Vec<f64>>,
    /// Smallest gap of each arm across players.
    pub gap_min: Vec<f64>,
    /// Largest gap of each arm across players.
    pub gap_max: Vec<f64>,
}

impl InstanceDiagnostics {
    pub fn of(instance: &MpmabInstance) -> Self {
        let optimal_means: Vec<f64> = instance
            .means
            .iter()
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let gaps: Vec<Vec<f64>> = instance
            .means
            .iter()
            .zip(&optimal_means)
            .map(|(row, best)| row.iter().map(|mu| best - mu).collect())
            .collect();
        let k = instance.num_arms;
        let gap_min = (0..k)
            .map(|i| gaps.iter().map(|g| g[i]).fold(f64::INFINITY, f64::min))
            .collect();
        let gap_max = (0..k)
            .map(|i| gaps.iter().map(|g| g[i]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        InstanceDiagnostics {
            dissimilarity: instance.dissimilarity(),
            optimal_means,
            gaps,
            gap_min,
            gap_max,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.gap_min.len()
    }

    /// Arms `i` with `gaps[p][i] > 5 * eps` for at least one player.
    pub fn subpar_arms(&self, eps: f64) -> BTreeSet<usize> {
        (0..self.num_arms())
            .filter(|&i| self.gap_max[i] > 5.0 * eps)
            .collect()
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws a random Bernoulli instance with exactly `num_subpar` subpar arms.
///
/// Player 1's first `K - num_subpar` arms are drawn from `[0.8, 0.8 + eps)`,
/// the rest from `[0, d - 5 eps)` where `d` is the best competitive mean.
/// Every other player perturbs player 1's means by less than `eps / 2`.
pub fn generate_instance<R: Rng + ?Sized>(
    num_players: usize,
    num_arms: usize,
    num_subpar: usize,
    eps: f64,
    rng: &mut R,
) -> Result<MpmabInstance> {
    if num_players == 0 || num_arms == 0 {
        return Err(Error::arg("need at least one player and one arm"));
    }
    if num_subpar >= num_arms {
        return Err(Error::arg(format!(
            "num_subpar must be below the number of arms ({num_subpar} >= {num_arms})"
        )));
    }
    if !(eps > 0.0 && eps <= MAX_GENERATOR_EPS) {
        return Err(Error::arg(format!(
            "generator eps must lie in (0, {MAX_GENERATOR_EPS}], got {eps}"
        )));
    }
    let competitive = num_arms - num_subpar;
    let mut leader = Vec::with_capacity(num_arms);
    for _ in 0..competitive {
        leader.push(uniform(rng, COMPETITIVE_BASE, COMPETITIVE_BASE + eps));
    }
    let best = leader.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ceiling = best - 5.0 * eps;
    if num_subpar > 0 && ceiling <= 0.0 {
        return Err(Error::arg(format!(
            "no room for subpar arms: best competitive mean {best} leaves {ceiling} below 5 eps"
        )));
    }
    for _ in competitive..num_arms {
        leader.push(uniform(rng, 0.0, ceiling));
    }

    let mut means = Vec::with_capacity(num_players);
    means.push(leader.clone());
    for _ in 1..num_players {
        let row = leader
            .iter()
            .map(|&mu| uniform(rng, (mu - eps / 2.0).max(0.0), (mu + eps / 2.0).min(1.0)))
            .collect();
        means.push(row);
    }
    MpmabInstance::new(means, RewardKind::Bernoulli)
}

/// Two-arm instance where every player sees means `1/2 + delta` and `1/2`.
pub fn example1_instance(num_players: usize, delta: f64) -> Result<MpmabInstance> {
    if num_players == 0 {
        return Err(Error::arg("need at least one player"));
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::arg(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    MpmabInstance::new(vec![vec![0.5 + delta, 0.5]; num_players], RewardKind::Bernoulli)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::rng::substream;

    fn point(means: Vec<Vec<f64>>) -> MpmabInstance {
        MpmabInstance::new(means, RewardKind::PointMass).unwrap()
    }

    #[test]
    fn point_mass_is_deterministic() {
        let inst = point(vec![vec![0.7, 0.2]]);
        let mut rng = substream(1, 0);
        for _ in 0..10 {
            assert_eq!(inst.sample_reward(0, 0, &mut rng).unwrap(), 0.7);
        }
    }

    #[test]
    fn degenerate_bernoulli() {
        let inst = MpmabInstance::new(vec![vec![0.0, 1.0]], RewardKind::Bernoulli).unwrap();
        let mut rng = substream(2, 0);
        for _ in 0..1000 {
            assert_eq!(inst.sample_reward(0, 0, &mut rng).unwrap(), 0.0);
            assert_eq!(inst.sample_reward(0, 1, &mut rng).unwrap(), 1.0);
        }
    }

    #[test]
    fn bernoulli_half_matches_frequency() {
        let inst = MpmabInstance::new(vec![vec![0.5]], RewardKind::Bernoulli).unwrap();
        let mut rng = substream(3, 0);
        let n = 100_000;
        let total: f64 = (0..n).map(|_| inst.sample_reward(0, 0, &mut rng).unwrap()).sum();
        assert!((total / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn sampling_is_reproducible() {
        let inst = MpmabInstance::new(vec![vec![0.3, 0.6]], RewardKind::Bernoulli).unwrap();
        let run = |seed| {
            let mut rng = substream(seed, 9);
            (0..64)
                .map(|t| inst.sample_reward(0, t % 2, &mut rng).unwrap().to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
    }

    #[test]
    fn out_of_range_indices() {
        let inst = point(vec![vec![0.5, 0.5]]);
        let mut rng = substream(0, 0);
        assert!(matches!(inst.sample_reward(1, 0, &mut rng), Err(Error::Index { what: "player", .. })));
        assert!(matches!(inst.sample_reward(0, 2, &mut rng), Err(Error::Index { what: "arm", .. })));
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(MpmabInstance::new(vec![], RewardKind::Bernoulli).is_err());
        assert!(MpmabInstance::new(vec![vec![]], RewardKind::Bernoulli).is_err());
        assert!(MpmabInstance::new(vec![vec![0.1], vec![0.1, 0.2]], RewardKind::Bernoulli).is_err());
        assert!(MpmabInstance::new(vec![vec![1.2]], RewardKind::Bernoulli).is_err());
        assert!(MpmabInstance::new(vec![vec![f64::NAN]], RewardKind::Bernoulli).is_err());
    }

    #[test]
    fn example1_shape_and_gaps() {
        let inst = example1_instance(2, 0.02).unwrap();
        assert_eq!(inst.means(), &[vec![0.52, 0.5], vec![0.52, 0.5]]);
        let diag = inst.diagnostics();
        assert_eq!(diag.dissimilarity, 0.0);
        assert_eq!(diag.gap_min, diag.gap_max);
        assert_eq!(diag.gap_min[0], 0.0);
        assert!((diag.gap_min[1] - 0.02).abs() < 1e-15);
        // delta <= eps / 4 with eps = 0.1: nothing is subpar.
        let inst = example1_instance(5, 0.025).unwrap();
        assert!(inst.subpar_arms(0.1).unwrap().is_empty());
        assert!(example1_instance(2, 0.0).is_err());
        assert!(example1_instance(2, 0.6).is_err());
    }

    #[test]
    fn uniform_means_have_no_gaps() {
        let inst = point(vec![vec![0.5; 4]; 3]);
        let diag = inst.diagnostics();
        assert!(diag.gaps.iter().flatten().all(|&g| g == 0.0));
        assert_eq!(diag.dissimilarity, 0.0);
    }

    #[test]
    fn eps_one_has_no_subpar_arms() {
        let inst = point(vec![vec![1.0, 0.0, 0.4], vec![0.0, 1.0, 0.2]]);
        assert!(inst.subpar_arms(1.0).unwrap().is_empty());
        assert!(inst.subpar_arms(-0.1).is_err());
    }

    #[test]
    fn generator_argument_errors() {
        let mut rng = substream(0, 0);
        assert!(generate_instance(3, 4, 4, 0.15, &mut rng).is_err());
        assert!(generate_instance(3, 4, 1, 0.0, &mut rng).is_err());
        assert!(generate_instance(3, 4, 1, 0.25, &mut rng).is_err());
        assert!(generate_instance(0, 4, 1, 0.1, &mut rng).is_err());
    }

    #[test]
    fn generator_fig1_parameters() {
        let mut rng = substream(7, 0);
        let inst = generate_instance(20, 10, 8, 0.15, &mut rng).unwrap();
        assert_eq!(inst.subpar_arms(0.15).unwrap(), (2..10).collect());
        assert!(inst.dissimilarity() <= 0.15);
        assert_eq!(inst.reward_kind(), RewardKind::Bernoulli);
    }

    #[test]
    fn single_player_without_subpar_arms() {
        let mut rng = substream(8, 0);
        let inst = generate_instance(1, 2, 0, 0.15, &mut rng).unwrap();
        assert!(inst.means()[0].iter().all(|&mu| (0.8..0.95).contains(&mu)));
        assert!(inst.subpar_arms(0.15).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rng = substream(9, 0);
        let inst = generate_instance(4, 5, 2, 0.15, &mut rng).unwrap();
        let back = MpmabInstance::from_json_str(&inst.to_json_string()).unwrap();
        assert_eq!(inst, back);
        let text = r#"{"num_players": 1, "num_arms": 2, "reward_kind": "pointmass", "means": [[0.1, 0.2]]}"#;
        assert_eq!(MpmabInstance::from_json_str(text).unwrap().reward_kind(), RewardKind::PointMass);
        let lying = r#"{"num_players": 2, "num_arms": 2, "reward_kind": "bernoulli", "means": [[0.1, 0.2]]}"#;
        assert!(MpmabInstance::from_json_str(lying).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn generated_instances_are_exact(seed in any::<u64>(), v in 0usize..10, m in 1usize..25) {
            let mut rng = substream(seed, 0);
            let inst = generate_instance(m, 10, v, 0.15, &mut rng).unwrap();
            prop_assert_eq!(inst.subpar_arms(0.15).unwrap(), (10 - v..10).collect::<BTreeSet<_>>());
            prop_assert!(inst.dissimilarity() <= 0.15);
        }

        #[test]
        fn gap_structure_facts(seed in any::<u64>(), v in 0usize..10, m in 1usize..25) {
            let eps = 0.15;
            let mut rng = substream(seed, 0);
            let inst = generate_instance(m, 10, v, eps, &mut rng).unwrap();
            let diag = inst.diagnostics();
            for i in 0..10 {
                for p in 0..m {
                    prop_assert!(diag.gaps[p][i] >= 0.0);
                    for q in 0..m {
                        prop_assert!((diag.gaps[p][i] - diag.gaps[q][i]).abs() <= 2.0 * diag.dissimilarity + 1e-12);
                    }
                }
            }
            let subpar = diag.subpar_arms(eps);
            prop_assert!(subpar.len() <= 9);
            for &i in &subpar {
                prop_assert!(diag.gap_min[i] > 3.0 * eps);
                prop_assert!(diag.gap_max[i] / diag.gap_min[i] < 2.0);
                let harmonic: f64 = diag.gaps.iter().map(|g| 1.0 / g[i]).sum();
                prop_assert!(1.0 / diag.gap_min[i] <= 2.0 / m as f64 * harmonic);
            }
        }
    }
}
