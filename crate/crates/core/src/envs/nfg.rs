use super::{Environment, Events, Step};
use crate::error::{Error, Result};
use crate::game::{Game, Player};

/// A normal-form game played as a one-step episode with a single state.
#[derive(Debug, Clone)]
pub struct NfgEnv {
    game: Game,
}

impl NfgEnv {
    pub fn new(game: Game) -> Self {
        NfgEnv { game }
    }

    pub fn game(&self) -> &Game {
        &self.game
    }
}

impl Environment for NfgEnv {
    fn num_actions(&self, player: Player) -> usize {
        self.game.num_actions(player)
    }

    fn num_observations(&self) -> usize {
        1
    }

    fn step_cap(&self) -> usize {
        1
    }

    fn is_symmetric(&self) -> bool {
        self.game.is_symmetric()
    }

    fn as_game(&self) -> Option<&Game> {
        Some(&self.game)
    }

    fn reset(&mut self, _seed: u64) -> [usize; 2] {
        [0, 0]
    }

    fn step(&mut self, actions: [usize; 2]) -> Result<Step> {
        let [a, b] = actions;
        let (n1, n2) = (self.game.num_actions(Player::One), self.game.num_actions(Player::Two));
        if a >= n1 || b >= n2 {
            return Err(Error::Validation(format!(
                "joint action ({a}, {b}) out of range for a {n1}x{n2} game"
            )));
        }
        Ok(Step {
            observations: [0, 0],
            rewards: [
                self.game.payoff(Player::One)[(a, b)],
                self.game.payoff(Player::Two)[(b, a)],
            ],
            done: true,
            events: Events::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{rollout, FixedAction};
    use nalgebra::DMatrix;

    fn identity() -> NfgEnv {
        NfgEnv::new(Game::symmetric(DMatrix::identity(2, 2)).unwrap())
    }

    #[test]
    fn rewards_follow_the_matrix() {
        let mut env = identity();
        assert_eq!(env.step([0, 0]).unwrap().rewards, [1.0, 1.0]);
        assert_eq!(env.step([0, 1]).unwrap().rewards, [0.0, 0.0]);
        assert!(env.step([2, 0]).is_err());
    }

    #[test]
    fn asymmetric_rewards_use_own_rows() {
        let g = Game::asymmetric(
            DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            DMatrix::from_row_slice(3, 2, &[10.0, 20.0, 30.0, 40.0, 50.0, 60.0]),
        )
        .unwrap();
        let mut env = NfgEnv::new(g);
        assert_eq!(env.step([1, 2]).unwrap().rewards, [6.0, 60.0]);
    }

    #[test]
    fn episodes_last_one_step() {
        let mut env = identity();
        let mut rng = crate::rng::seeded(0);
        let ep = rollout(&mut env, [&FixedAction(1), &FixedAction(1)], 3, &mut rng).unwrap();
        assert_eq!(ep.steps, 1);
        assert_eq!(ep.returns, [1.0, 1.0]);
    }
}
