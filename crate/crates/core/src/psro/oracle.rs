use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{PolicyHandle, PolicyKind, TabularPolicy};
use crate::envs::{Environment, Policy};
use crate::error::{Error, Result};
use crate::game::{argmax, Game, MixedStrategy, Player};
use crate::risk::{total_utility, RiskProfile};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Enumerate pure actions of the underlying normal-form game.
    ExactNfg,
    /// Tabular softmax policy gradient on the mean-variance reward.
    MeanVariancePG,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub kind: OracleKind,
    /// Variance aversion of the oracle.
    pub lambda: f64,
    pub learning_rate: f64,
    /// Training episodes per oracle call.
    pub episodes: usize,
    /// Per-episode step limit during training (capped by the environment's own).
    pub episode_cap: usize,
    /// Episodes per gradient step; the reward mean `y` is recomputed per batch.
    pub batch_size: usize,
    pub discount: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            kind: OracleKind::MeanVariancePG,
            lambda: 0.0,
            learning_rate: 4.0,
            episodes: 300_000,
            episode_cap: 64,
            batch_size: 20,
            discount: 0.9,
        }
    }
}

impl OracleConfig {
    pub fn exact(lambda: f64) -> Self {
        OracleConfig {
            kind: OracleKind::ExactNfg,
            lambda,
            ..OracleConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!(
                "oracle lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if self.kind == OracleKind::MeanVariancePG {
            if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
                return Err(Error::Config(format!(
                    "oracle learning rate must be > 0, got {}",
                    self.learning_rate
                )));
            }
            if self.episodes == 0 || self.episode_cap == 0 || self.batch_size == 0 {
                return Err(Error::Config(
                    "oracle episodes, episode_cap and batch_size must be positive".into(),
                ));
            }
            if !(0.0..=1.0).contains(&self.discount) {
                return Err(Error::Config(format!(
                    "discount must be in [0, 1], got {}",
                    self.discount
                )));
            }
        }
        Ok(())
    }
}

/// Mean-variance reward shaping: `g - λ g² + 2 λ g y`.
pub fn augmented_reward(g: f64, lambda: f64, y: f64) -> f64 {
    g - lambda * g * g + 2.0 * lambda * g * y
}

/// Mix the population's action distributions by the meta-distribution.
pub fn lift_mixture(population: &[PolicyHandle], meta: &MixedStrategy, num_actions: usize) -> Result<MixedStrategy> {
    if population.len() != meta.len() {
        return Err(Error::Validation(format!(
            "meta-distribution over {} policies for a population of {}",
            meta.len(),
            population.len()
        )));
    }
    let mut mix = vec![0.0; num_actions];
    for (policy, &w) in population.iter().zip(meta.probs()) {
        let d = policy.action_distribution(num_actions);
        if d.len() != num_actions {
            return Err(Error::Validation(
                "policy does not match the game's action count".into(),
            ));
        }
        for (m, p) in mix.iter_mut().zip(d) {
            *m += w * p;
        }
    }
    let total: f64 = mix.iter().sum();
    MixedStrategy::new(mix.into_iter().map(|m| m / total).collect())
}

/// Best pure action of `player` against the lifted opponent mixture under
/// `u - γ Var`. Ties go to the lowest index.
pub fn exact_nfg_oracle(
    opponent_meta: &MixedStrategy,
    opponent_population: &[PolicyHandle],
    game: &Game,
    player: Player,
    profile: &RiskProfile,
    id: usize,
) -> Result<PolicyHandle> {
    let n = game.num_actions(player);
    let mix = lift_mixture(opponent_population, opponent_meta, game.num_actions(player.opponent()))?;
    let m = game.payoff(player);
    let values = (0..n)
        .map(|a| total_utility(&MixedStrategy::pure(n, a), &mix, m, profile))
        .collect::<Result<Vec<_>>>()?;
    Ok(PolicyHandle {
        id,
        kind: PolicyKind::NfgPure(argmax(&values)),
    })
}

struct Transition {
    obs: usize,
    action: usize,
    reward: f64,
    /// Offset of the acting distribution in the batch's probability buffer.
    probs_at: usize,
}

fn divergence(message: impl Into<String>) -> Error {
    Error::Oracle {
        iteration: 0,
        message: message.into(),
    }
}

/// Train a tabular softmax policy for `player`'s seat by REINFORCE on the
/// augmented reward, against opponents drawn per episode from the
/// meta-distribution. A per-observation value table serves as baseline.
pub fn mean_variance_pg_oracle<E: Environment>(
    opponent_population: &[PolicyHandle],
    opponent_meta: &MixedStrategy,
    env: &E,
    player: Player,
    cfg: &OracleConfig,
    seed: u64,
    id: usize,
) -> Result<PolicyHandle> {
    cfg.validate()?;
    if opponent_population.len() != opponent_meta.len() {
        return Err(Error::Validation(
            "meta-distribution does not match the population".into(),
        ));
    }
    let num_obs = env.num_observations();
    let num_actions = env.num_actions(player);
    let seat = player.index();
    let cap = cfg.episode_cap.min(env.step_cap());

    let mut env = env.clone();
    let mut rng = rng::seeded(seed);
    let mut logits = vec![0.0; num_obs * num_actions];
    let mut value = vec![0.0; num_obs];
    let mut visits = vec![0u32; num_obs];
    let mut probs = vec![0.0; num_actions];
    let mut grad = vec![0.0; num_obs * num_actions];

    let mut remaining = cfg.episodes;
    while remaining > 0 {
        let batch = cfg.batch_size.min(remaining);
        remaining -= batch;
        let mut episodes: Vec<Vec<Transition>> = Vec::with_capacity(batch);
        let mut acting = Vec::with_capacity(batch * cap * num_actions);
        for _ in 0..batch {
            let opp = &opponent_population[rng::categorical(&mut rng, opponent_meta.probs())];
            let mut obs = env.reset(rng.next_u64());
            let mut traj = Vec::with_capacity(cap);
            for _ in 0..cap {
                let o = obs[seat];
                softmax_row(&logits[o * num_actions..(o + 1) * num_actions], &mut probs);
                let mine = rng::categorical(&mut rng, &probs);
                let probs_at = acting.len();
                acting.extend_from_slice(&probs);
                let theirs = opp.act(obs[1 - seat], &mut rng);
                let actions = if seat == 0 { [mine, theirs] } else { [theirs, mine] };
                let step = env.step(actions)?;
                traj.push(Transition {
                    obs: o,
                    action: mine,
                    reward: step.rewards[seat],
                    probs_at,
                });
                obs = step.observations;
                if step.done {
                    break;
                }
            }
            episodes.push(traj);
        }

        let steps: usize = episodes.iter().map(Vec::len).sum();
        if steps == 0 {
            continue;
        }
        let y = episodes.iter().flatten().map(|t| t.reward).sum::<f64>() / steps as f64;

        grad.iter_mut().for_each(|g| *g = 0.0);
        for traj in &episodes {
            let mut ret = 0.0;
            for t in traj.iter().rev() {
                ret = augmented_reward(t.reward, cfg.lambda, y) + cfg.discount * ret;
                let o = t.obs;
                visits[o] += 1;
                let advantage = ret - value[o];
                value[o] += advantage / visits[o].min(100) as f64;
                let pi = &acting[t.probs_at..t.probs_at + num_actions];
                for a in 0..num_actions {
                    let indicator = if a == t.action { 1.0 } else { 0.0 };
                    grad[o * num_actions + a] += advantage * (indicator - pi[a]);
                }
            }
        }
        let scale = cfg.learning_rate / batch as f64;
        for (l, g) in logits.iter_mut().zip(&grad) {
            *l += scale * g;
        }
        if logits.iter().any(|l| !l.is_finite()) || value.iter().any(|v| !v.is_finite()) {
            return Err(divergence("policy-gradient update produced non-finite values"));
        }
    }

    let table = TabularPolicy::from_logits(num_obs, num_actions, &logits)?;
    Ok(PolicyHandle {
        id,
        kind: PolicyKind::Tabular(table),
    })
}

fn softmax_row(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::NfgEnv;

    #[test]
    fn augmented_reward_examples() {
        for (lambda, y) in [(0.0, 3.0), (0.7, -2.0), (5.0, 10.0)] {
            assert_eq!(augmented_reward(0.0, lambda, y), 0.0);
        }
        for g in [-3.0, 0.5, 12.0] {
            assert_eq!(augmented_reward(g, 0.0, 4.0), g);
        }
        assert_eq!(augmented_reward(1.0, 0.5, 1.0), 1.5);
    }

    fn risky() -> Game {
        Game::symmetric_from_rows(&[vec![7.0, 7.0, 7.0], vec![0.0, 20.0, 4.0], vec![3.0, 8.0, 9.0]]).unwrap()
    }

    fn pure(id: usize, a: usize) -> PolicyHandle {
        PolicyHandle {
            id,
            kind: PolicyKind::NfgPure(a),
        }
    }

    #[test]
    fn exact_oracle_neutral_picks_expected_payoff() {
        let g = risky();
        let pop = [PolicyHandle {
            id: 0,
            kind: PolicyKind::Tabular(TabularPolicy::uniform(1, 3)),
        }];
        let meta = MixedStrategy::uniform(1);
        let h = exact_nfg_oracle(&meta, &pop, &g, Player::One, &RiskProfile::new(0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(h.kind, PolicyKind::NfgPure(1));
        let h = exact_nfg_oracle(&meta, &pop, &g, Player::One, &RiskProfile::new(1.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(h.kind, PolicyKind::NfgPure(0));
    }

    #[test]
    fn exact_oracle_beats_population_members() {
        let g = risky();
        let pop = [pure(0, 0), pure(1, 1), pure(2, 2)];
        let meta = MixedStrategy::new(vec![0.2, 0.5, 0.3]).unwrap();
        let profile = RiskProfile::new(0.05, 0.0).unwrap();
        let mix = lift_mixture(&pop, &meta, 3).unwrap();
        let h = exact_nfg_oracle(&meta, &pop, &g, Player::One, &profile, 3).unwrap();
        let PolicyKind::NfgPure(best) = h.kind else { panic!() };
        let value = |a| total_utility(&MixedStrategy::pure(3, a), &mix, g.payoff(Player::One), &profile).unwrap();
        for a in 0..3 {
            assert!(value(best) >= value(a));
        }
    }

    #[test]
    fn exact_oracle_single_action() {
        let g = Game::symmetric_from_rows(&[vec![2.0]]).unwrap();
        let h = exact_nfg_oracle(
            &MixedStrategy::uniform(1),
            &[pure(0, 0)],
            &g,
            Player::Two,
            &RiskProfile::neutral(),
            1,
        )
        .unwrap();
        assert_eq!(h.kind, PolicyKind::NfgPure(0));
    }

    #[test]
    fn pg_oracle_finds_dominant_action() {
        let g = Game::symmetric_from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let env = NfgEnv::new(g);
        let cfg = OracleConfig {
            episodes: 2000,
            ..OracleConfig::default()
        };
        let h =
            mean_variance_pg_oracle(&[pure(0, 0)], &MixedStrategy::uniform(1), &env, Player::One, &cfg, 7, 1).unwrap();
        let d = h.action_distribution(2);
        assert!(d[1] > 0.95, "{d:?}");
    }

    #[test]
    fn pg_oracle_variance_aversion_prefers_safe_action() {
        // Action 0 pays 1 for sure; action 1 pays 0 or 3 on the opponent's coin flip.
        let g = Game::asymmetric(
            nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 3.0]),
            nalgebra::DMatrix::zeros(2, 2),
        )
        .unwrap();
        let env = NfgEnv::new(g);
        let opp = [pure(0, 0), pure(1, 1)];
        let meta = MixedStrategy::uniform(2);
        let run = |lambda| {
            let cfg = OracleConfig {
                lambda,
                episodes: 1000,
                learning_rate: 0.2,
                ..OracleConfig::default()
            };
            mean_variance_pg_oracle(&opp, &meta, &env, Player::One, &cfg, 3, 2)
                .unwrap()
                .action_distribution(2)
        };
        assert!(run(0.0)[1] > 0.8);
        assert!(run(1.0)[0] > 0.8);
    }

    #[test]
    fn pg_oracle_is_deterministic() {
        let env = NfgEnv::new(risky());
        let cfg = OracleConfig {
            episodes: 60,
            ..OracleConfig::default()
        };
        let pop = [pure(0, 1)];
        let a = mean_variance_pg_oracle(&pop, &MixedStrategy::uniform(1), &env, Player::One, &cfg, 11, 1).unwrap();
        let b = mean_variance_pg_oracle(&pop, &MixedStrategy::uniform(1), &env, Player::One, &cfg, 11, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn diverging_training_is_an_oracle_error() {
        let g = Game::symmetric_from_rows(&[vec![1e300, 0.0], vec![0.0, -1e300]]).unwrap();
        let cfg = OracleConfig {
            lambda: 10.0,
            episodes: 40,
            ..OracleConfig::default()
        };
        let err = mean_variance_pg_oracle(
            &[pure(0, 0)],
            &MixedStrategy::uniform(1),
            &NfgEnv::new(g),
            Player::One,
            &cfg,
            0,
            1,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "oracle");
    }
}
