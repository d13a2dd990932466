use rand::RngCore;
use serde::Serialize;

use super::{PolicyHandle, Population};
use crate::envs::{rollout, Environment, Events, Policy};
use crate::error::{Error, Result};
use crate::rng;

/// Monte Carlo estimate of one meta-game entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaEntry {
    /// Mean episode return per player.
    pub mean: [f64; 2],
    /// Episode returns per player, in rollout order.
    pub samples: [Vec<f64>; 2],
}

impl MetaEntry {
    /// Unbiased sample variance of each player's episode return.
    pub fn sample_variance(&self) -> [f64; 2] {
        let var = |xs: &[f64], mean: f64| {
            if xs.len() < 2 {
                0.0
            } else {
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
            }
        };
        [var(&self.samples[0], self.mean[0]), var(&self.samples[1], self.mean[1])]
    }
}

/// Play `policy_a` (seat one) against `policy_b` (seat two) for `episodes`
/// episodes.
pub fn estimate_meta_entry<E: Environment>(
    policy_a: &PolicyHandle,
    policy_b: &PolicyHandle,
    env: &E,
    episodes: usize,
    seed: u64,
) -> Result<MetaEntry> {
    if episodes == 0 {
        return Err(Error::Config("meta-game estimation needs at least one episode".into()));
    }
    let mut env = env.clone();
    let mut rng = rng::seeded(seed);
    let mut samples = [Vec::with_capacity(episodes), Vec::with_capacity(episodes)];
    for _ in 0..episodes {
        let env_seed = rng.next_u64();
        let ep = rollout(&mut env, [policy_a as &dyn Policy, policy_b], env_seed, &mut rng)?;
        for i in 0..2 {
            samples[i].push(ep.returns[i]);
        }
    }
    let mean = [
        samples[0].iter().sum::<f64>() / episodes as f64,
        samples[1].iter().sum::<f64>() / episodes as f64,
    ];
    Ok(MetaEntry { mean, samples })
}

/// Aggregate statistics of two populations playing each other.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CrossEvalSummary {
    pub episodes: usize,
    /// Mean episode return of the seat-one and seat-two populations.
    pub mean_return: [f64; 2],
    /// Population variance of episode returns per seat.
    pub return_variance: [f64; 2],
    pub events: Events,
    /// Visits per grid cell (row-major) per seat, when the environment
    /// reports positions.
    pub position_counts: Option<[Vec<u64>; 2]>,
}

impl CrossEvalSummary {
    pub fn gore_rate(&self, seat: usize) -> f64 {
        self.rate(self.events.gores[seat] as f64)
    }

    pub fn plant_rate(&self, seat: usize) -> f64 {
        self.rate(self.events.plants[seat] as f64)
    }

    pub fn capture_rate(&self) -> f64 {
        self.rate(self.events.captures as f64)
    }

    fn rate(&self, count: f64) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            count / self.episodes as f64
        }
    }
}

/// Each episode samples one policy from each population's meta-distribution
/// (`pop_a` in seat one) and plays it out. `episodes == 0` yields an empty
/// summary.
pub fn cross_population_eval<E: Environment>(
    pop_a: &Population,
    pop_b: &Population,
    env: &E,
    episodes: usize,
    seed: u64,
) -> Result<CrossEvalSummary> {
    cross_population_eval_with(pop_a, pop_b, env, episodes, seed, |_| {})
}

/// [`cross_population_eval`], handing every episode to `observe`.
pub fn cross_population_eval_with<E: Environment>(
    pop_a: &Population,
    pop_b: &Population,
    env: &E,
    episodes: usize,
    seed: u64,
    mut observe: impl FnMut(&crate::envs::Episode),
) -> Result<CrossEvalSummary> {
    let mut summary = CrossEvalSummary::default();
    if episodes == 0 {
        return Ok(summary);
    }
    let mut env = env.clone();
    let mut rng = rng::seeded(seed);
    let mut returns = [Vec::with_capacity(episodes), Vec::with_capacity(episodes)];
    let mut counts: Option<[Vec<u64>; 2]> = None;
    for _ in 0..episodes {
        let a = &pop_a.policies[rng::categorical(&mut rng, pop_a.meta_distribution.probs())];
        let b = &pop_b.policies[rng::categorical(&mut rng, pop_b.meta_distribution.probs())];
        let env_seed = rng.next_u64();
        let ep = rollout(&mut env, [a as &dyn Policy, b], env_seed, &mut rng)?;
        for i in 0..2 {
            returns[i].push(ep.returns[i]);
        }
        summary.events.add(&ep.events);
        if !ep.positions.is_empty() {
            let c = counts.get_or_insert_with(Default::default);
            for p in &ep.positions {
                for i in 0..2 {
                    if c[i].len() <= p[i] {
                        c[i].resize(p[i] + 1, 0);
                    }
                    c[i][p[i]] += 1;
                }
            }
        }
        observe(&ep);
    }
    summary.episodes = episodes;
    for i in 0..2 {
        let mean = returns[i].iter().sum::<f64>() / episodes as f64;
        summary.mean_return[i] = mean;
        summary.return_variance[i] = returns[i].iter().map(|r| (r - mean).powi(2)).sum::<f64>() / episodes as f64;
    }
    summary.position_counts = counts;
    Ok(summary)
}
