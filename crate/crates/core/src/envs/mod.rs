//! Two-player episodic environments with finite observation and action
//! spaces, so tabular policies can act in them.

mod nfg;
mod stag_hunt;

use rand::RngCore;
use serde::Serialize;

use crate::error::Result;
use crate::game::{Game, Player};

pub use nfg::NfgEnv;
pub use stag_hunt::{
    Action, Pos, StagHunt, StagHuntConfig, StagHuntState, CELL_EMPTY, CELL_PLANT, CELL_PLAYER, CELL_STAG, GRID,
    OBS_ENCODING_VERSION,
};

/// Event counters accumulated over a step or an episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Events {
    /// Plants gathered, per player.
    pub plants: [u32; 2],
    /// Joint stag captures (each one rewards both players).
    pub captures: u32,
    /// Times each player met the stag alone.
    pub gores: [u32; 2],
}

impl Events {
    pub fn add(&mut self, other: &Events) {
        for i in 0..2 {
            self.plants[i] += other.plants[i];
            self.gores[i] += other.gores[i];
        }
        self.captures += other.captures;
    }

    pub fn is_empty(&self) -> bool {
        *self == Events::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observations: [usize; 2],
    pub rewards: [f64; 2],
    pub done: bool,
    pub events: Events,
}

/// A two-player episodic environment.
pub trait Environment: Clone + Send + Sync {
    fn num_actions(&self, player: Player) -> usize;
    /// Size of each player's observation index space.
    fn num_observations(&self) -> usize;
    /// Hard cap on episode length.
    fn step_cap(&self) -> usize;
    /// Whether both seats are interchangeable (single-population PSRO).
    fn is_symmetric(&self) -> bool;
    /// Start an episode; returns each player's observation.
    fn reset(&mut self, seed: u64) -> [usize; 2];
    fn step(&mut self, actions: [usize; 2]) -> Result<Step>;
    /// Cell each player occupies, for environments with a spatial layout.
    fn positions(&self) -> Option<[usize; 2]> {
        None
    }
    /// The underlying normal-form game, for one-shot matrix environments.
    fn as_game(&self) -> Option<&Game> {
        None
    }
}

/// Something that picks actions from observations.
pub trait Policy {
    fn act(&self, observation: usize, rng: &mut dyn RngCore) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub returns: [f64; 2],
    /// Per-step rewards for each player.
    pub rewards: [Vec<f64>; 2],
    pub events: Events,
    pub steps: usize,
    /// Cells occupied after each step, if the environment reports them.
    pub positions: Vec<[usize; 2]>,
}

/// Play one episode. Environment randomness comes from `env_seed`, action
/// sampling from `rng`.
pub fn rollout<E: Environment>(
    env: &mut E,
    policies: [&dyn Policy; 2],
    env_seed: u64,
    rng: &mut dyn RngCore,
) -> Result<Episode> {
    let mut obs = env.reset(env_seed);
    let mut episode = Episode {
        returns: [0.0; 2],
        rewards: [Vec::new(), Vec::new()],
        events: Events::default(),
        steps: 0,
        positions: Vec::new(),
    };
    if let Some(p) = env.positions() {
        episode.positions.push(p);
    }
    for _ in 0..env.step_cap() {
        let actions = [policies[0].act(obs[0], rng), policies[1].act(obs[1], rng)];
        let step = env.step(actions)?;
        for i in 0..2 {
            episode.returns[i] += step.rewards[i];
            episode.rewards[i].push(step.rewards[i]);
        }
        episode.events.add(&step.events);
        episode.steps += 1;
        if let Some(p) = env.positions() {
            episode.positions.push(p);
        }
        obs = step.observations;
        if step.done {
            break;
        }
    }
    Ok(episode)
}

/// A policy that always plays the same action.
#[derive(Debug, Clone, Copy)]
pub struct FixedAction(pub usize);

impl Policy for FixedAction {
    fn act(&self, _: usize, _: &mut dyn RngCore) -> usize {
        self.0
    }
}
