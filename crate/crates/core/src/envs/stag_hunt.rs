//! 5×5 grid-world stag hunt: two players, one stag, two plants.
//!
//! Each step both players move one cell (moves off the grid are no-ops),
//! then the stag takes one step towards the nearest player. Contacts are
//! resolved on the resulting positions:
//!
//! * both players on the stag: +5 each, the stag respawns;
//! * one player on the stag: −2 for that player (a gore), the stag respawns;
//! * a player on a plant (and not involved with the stag this step): +2,
//!   the plant respawns.
//!
//! Because the stag never leaves a cell a player occupies, a player and the
//! stag can never swap cells; every contact is a shared cell.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Environment, Events, Step};
use crate::error::{Error, Result};
use crate::game::Player;
use crate::rng;

pub const GRID: usize = 5;

pub const CELL_EMPTY: u8 = 0;
pub const CELL_PLAYER: u8 = 1;
pub const CELL_STAG: u8 = 2;
pub const CELL_PLANT: u8 = 3;

/// Bumped whenever [`StagHunt::observe`] changes meaning.
pub const OBS_ENCODING_VERSION: u32 = 2;

/// Stag offsets are clipped to ±`STAG_RANGE` per axis.
const STAG_RANGE: i32 = 2;
const STAG_CODES: usize = (2 * STAG_RANGE as usize + 1) * (2 * STAG_RANGE as usize + 1);

/// `(row, col)`, row 0 at the top.
pub type Pos = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Left,
    Right,
    Up,
    Down,
}

impl Action {
    /// Also the stag's move priority.
    pub const ALL: [Action; 4] = [Action::Left, Action::Right, Action::Up, Action::Down];

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn apply(self, (r, c): Pos) -> Pos {
        match self {
            Action::Left => (r, c.saturating_sub(1)),
            Action::Right => (r, (c + 1).min(GRID - 1)),
            Action::Up => (r.saturating_sub(1), c),
            Action::Down => ((r + 1).min(GRID - 1), c),
        }
    }
}

fn manhattan(a: Pos, b: Pos) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

pub fn cell_index((r, c): Pos) -> usize {
    r * GRID + c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StagHuntConfig {
    pub step_cap: usize,
    pub capture_reward: f64,
    pub plant_reward: f64,
    pub gore_penalty: f64,
}

impl Default for StagHuntConfig {
    fn default() -> Self {
        StagHuntConfig {
            step_cap: 64,
            capture_reward: 5.0,
            plant_reward: 2.0,
            gore_penalty: 2.0,
        }
    }
}

impl StagHuntConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step_cap == 0 {
            return Err(Error::Config("step_cap must be at least 1".into()));
        }
        for (name, v) in [
            ("capture_reward", self.capture_reward),
            ("plant_reward", self.plant_reward),
            ("gore_penalty", self.gore_penalty),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StagHuntState {
    pub players: [Pos; 2],
    pub stag: Pos,
    pub plants: [Pos; 2],
    pub step: usize,
}

impl StagHuntState {
    /// Cell codes; where entities share a cell, players show over the stag
    /// and the stag over plants.
    pub fn grid(&self) -> [[u8; GRID]; GRID] {
        let mut g = [[CELL_EMPTY; GRID]; GRID];
        for &(r, c) in &self.plants {
            g[r][c] = CELL_PLANT;
        }
        g[self.stag.0][self.stag.1] = CELL_STAG;
        for &(r, c) in &self.players {
            g[r][c] = CELL_PLAYER;
        }
        g
    }

    fn entities(&self) -> [Pos; 5] {
        [
            self.players[0],
            self.players[1],
            self.stag,
            self.plants[0],
            self.plants[1],
        ]
    }

    pub fn in_bounds(&self) -> bool {
        self.entities().iter().all(|&(r, c)| r < GRID && c < GRID)
    }

    /// True when all five entities occupy different cells.
    pub fn all_distinct(&self) -> bool {
        let e = self.entities();
        (0..e.len()).all(|i| (i + 1..e.len()).all(|j| e[i] != e[j]))
    }

    fn occupied(&self) -> [bool; GRID * GRID] {
        let mut occ = [false; GRID * GRID];
        for p in self.entities() {
            occ[cell_index(p)] = true;
        }
        occ
    }

    /// Index of the player the stag chases: nearest, lowest index on ties.
    pub fn stag_target(&self) -> usize {
        let d0 = manhattan(self.stag, self.players[0]);
        let d1 = manhattan(self.stag, self.players[1]);
        if d1 < d0 {
            1
        } else {
            0
        }
    }

    pub fn stag_distance(&self) -> usize {
        manhattan(self.stag, self.players[0]).min(manhattan(self.stag, self.players[1]))
    }
}

fn random_free_cell(rng: &mut impl RngCore, occupied: &[bool; GRID * GRID]) -> Pos {
    let free: Vec<usize> = (0..GRID * GRID).filter(|&i| !occupied[i]).collect();
    let i = free[rng::index(rng, free.len())];
    (i / GRID, i % GRID)
}

/// Random layout with five distinct cells, drawn from `rng`.
fn random_layout(rng: &mut impl RngCore) -> StagHuntState {
    let mut cells: Vec<usize> = (0..GRID * GRID).collect();
    let mut pick = |k: usize| {
        // Partial Fisher-Yates.
        let j = k + rng::index(rng, cells.len() - k);
        cells.swap(k, j);
        (cells[k] / GRID, cells[k] % GRID)
    };
    let players = [pick(0), pick(1)];
    let stag = pick(2);
    let plants = [pick(3), pick(4)];
    StagHuntState {
        players,
        stag,
        plants,
        step: 0,
    }
}

#[derive(Debug, Clone)]
pub struct StagHunt {
    config: StagHuntConfig,
    state: StagHuntState,
    rng: ChaCha8Rng,
}

impl StagHunt {
    pub fn new(config: StagHuntConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng::seeded(0);
        let state = random_layout(&mut rng);
        Ok(StagHunt { config, state, rng })
    }

    /// Start from a given state; `seed` drives respawns.
    pub fn from_state(config: StagHuntConfig, state: StagHuntState, seed: u64) -> Result<Self> {
        config.validate()?;
        if !state.in_bounds() {
            return Err(Error::Validation("entity outside the grid".into()));
        }
        Ok(StagHunt {
            config,
            state,
            rng: rng::seeded(seed),
        })
    }

    pub fn config(&self) -> &StagHuntConfig {
        &self.config
    }

    pub fn state(&self) -> &StagHuntState {
        &self.state
    }

    /// Observation of `player`, encoded as
    /// `((stag_code * 9 + plant_code) * 9 + partner_code) * 9 + wall_code`
    /// where
    ///
    /// * `stag_code` ∈ 0..25: the stag's offset from the player, each axis
    ///   clipped to [−2, 2], as `(dr + 2) * 5 + (dc + 2)`;
    /// * `plant_code` ∈ 0..9: signs of the offset to the nearest plant
    ///   (lowest index on ties), as `(sr + 1) * 3 + (sc + 1)`;
    /// * `partner_code` ∈ 0..9: signs of the offset to the other player;
    /// * `wall_code` ∈ 0..9: whether the player is on the first, an inner or
    ///   the last row, times 3, plus the same for columns. Without it a
    ///   fleeing player cannot tell a blocked move from a free one.
    pub fn observe(&self, player: Player) -> usize {
        let s = &self.state;
        let me = s.players[player.index()];
        let offset = |to: Pos| (to.0 as i32 - me.0 as i32, to.1 as i32 - me.1 as i32);
        let (sr, sc) = offset(s.stag);
        let stag_code = ((sr.clamp(-STAG_RANGE, STAG_RANGE) + STAG_RANGE) * (2 * STAG_RANGE + 1)
            + (sc.clamp(-STAG_RANGE, STAG_RANGE) + STAG_RANGE)) as usize;
        let plant = if manhattan(me, s.plants[1]) < manhattan(me, s.plants[0]) {
            s.plants[1]
        } else {
            s.plants[0]
        };
        let sign_code = |(dr, dc): (i32, i32)| ((dr.signum() + 1) * 3 + (dc.signum() + 1)) as usize;
        let plant_code = sign_code(offset(plant));
        let partner_code = sign_code(offset(s.players[player.opponent().index()]));
        let edge = |x: usize| {
            if x == 0 {
                0
            } else if x == GRID - 1 {
                2
            } else {
                1
            }
        };
        let wall_code = edge(me.0) * 3 + edge(me.1);
        ((stag_code * 9 + plant_code) * 9 + partner_code) * 9 + wall_code
    }

    fn observations(&self) -> [usize; 2] {
        [self.observe(Player::One), self.observe(Player::Two)]
    }

    fn move_stag(&mut self) {
        let s = &mut self.state;
        let target = s.players[s.stag_target()];
        let d = manhattan(s.stag, target);
        if d == 0 {
            return;
        }
        for a in Action::ALL {
            let next = a.apply(s.stag);
            if manhattan(next, target) < d {
                s.stag = next;
                return;
            }
        }
    }

    /// Advance one step with actions given as indices into [`Action::ALL`].
    pub fn step_actions(&mut self, actions: [Action; 2]) -> Step {
        let cfg = self.config;
        for i in 0..2 {
            self.state.players[i] = actions[i].apply(self.state.players[i]);
        }
        self.move_stag();

        let s = &self.state;
        let mut rewards = [0.0; 2];
        let mut events = Events::default();
        let on_stag = [s.players[0] == s.stag, s.players[1] == s.stag];
        let mut respawn_stag = false;
        let mut respawn_plant = [false; 2];
        match on_stag {
            [true, true] => {
                rewards = [cfg.capture_reward; 2];
                events.captures = 1;
                respawn_stag = true;
            }
            [true, false] | [false, true] => {
                let i = if on_stag[0] { 0 } else { 1 };
                rewards[i] = -cfg.gore_penalty;
                events.gores[i] = 1;
                respawn_stag = true;
            }
            [false, false] => {}
        }
        for i in 0..2 {
            if on_stag[i] {
                continue;
            }
            if let Some(k) = (0..2).find(|&k| s.plants[k] == s.players[i]) {
                rewards[i] = cfg.plant_reward;
                events.plants[i] = 1;
                respawn_plant[k] = true;
            }
        }

        if respawn_stag {
            let mut occ = self.state.occupied();
            occ[cell_index(self.state.stag)] = false;
            // The stag must not land back under a player.
            for p in self.state.players {
                occ[cell_index(p)] = true;
            }
            self.state.stag = random_free_cell(&mut self.rng, &occ);
        }
        for k in 0..2 {
            if respawn_plant[k] {
                let mut occ = self.state.occupied();
                for p in self.state.players {
                    occ[cell_index(p)] = true;
                }
                self.state.plants[k] = random_free_cell(&mut self.rng, &occ);
            }
        }
        self.state.step += 1;
        Step {
            observations: self.observations(),
            rewards,
            done: self.state.step >= cfg.step_cap,
            events,
        }
    }
}

impl Environment for StagHunt {
    fn num_actions(&self, _player: Player) -> usize {
        Action::ALL.len()
    }

    fn num_observations(&self) -> usize {
        STAG_CODES * 729
    }

    fn step_cap(&self) -> usize {
        self.config.step_cap
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn reset(&mut self, seed: u64) -> [usize; 2] {
        self.rng = rng::seeded(seed);
        self.state = random_layout(&mut self.rng);
        self.observations()
    }

    fn step(&mut self, actions: [usize; 2]) -> Result<Step> {
        let a = Action::from_index(actions[0]);
        let b = Action::from_index(actions[1]);
        match (a, b) {
            (Some(a), Some(b)) => Ok(self.step_actions([a, b])),
            _ => Err(Error::Validation(format!("invalid stag-hunt actions {actions:?}"))),
        }
    }

    fn positions(&self) -> Option<[usize; 2]> {
        Some([cell_index(self.state.players[0]), cell_index(self.state.players[1])])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(players: [Pos; 2], stag: Pos, plants: [Pos; 2]) -> StagHunt {
        let state = StagHuntState {
            players,
            stag,
            plants,
            step: 0,
        };
        StagHunt::from_state(StagHuntConfig::default(), state, 1).unwrap()
    }

    #[test]
    fn joint_capture() {
        // Stag at (2,2); players step onto it from both sides.
        let mut e = env([(2, 1), (2, 3)], (2, 2), [(0, 0), (4, 4)]);
        let step = e.step_actions([Action::Right, Action::Left]);
        assert_eq!(step.rewards, [5.0, 5.0]);
        assert_eq!(step.events.captures, 1);
        assert_ne!(e.state().stag, (2, 2));
    }

    #[test]
    fn plant_gathering() {
        let mut e = env([(0, 1), (4, 0)], (4, 4), [(0, 0), (2, 2)]);
        let step = e.step_actions([Action::Left, Action::Up]);
        assert_eq!(step.rewards, [2.0, 0.0]);
        assert_eq!(step.events.plants, [1, 0]);
        assert_ne!(e.state().plants[0], (0, 0));
        assert!(e.state().all_distinct());
    }

    #[test]
    fn stag_gores_a_lone_player() {
        // Player 0 stays against the wall; the stag steps onto it.
        let mut e = env([(0, 0), (4, 4)], (0, 1), [(2, 2), (3, 0)]);
        let step = e.step_actions([Action::Left, Action::Right]);
        assert_eq!(step.rewards, [-2.0, 0.0]);
        assert_eq!(step.events.gores, [1, 0]);
    }

    #[test]
    fn stag_step_priority_and_target() {
        // Equidistant players: chase player 0, prefer moving left.
        let mut e = env([(0, 0), (4, 4)], (2, 2), [(0, 4), (4, 0)]);
        e.step_actions([Action::Up, Action::Down]);
        assert_eq!(e.state().stag, (2, 1));
    }

    #[test]
    fn stag_pursuit_never_increases_distance() {
        let mut e = StagHunt::new(StagHuntConfig::default()).unwrap();
        let mut rng = rng::seeded(9);
        for ep in 0..50 {
            e.reset(ep);
            for _ in 0..64 {
                let actions = [
                    Action::ALL[rng::index(&mut rng, 4)],
                    Action::ALL[rng::index(&mut rng, 4)],
                ];
                let mut moved = e.clone();
                for i in 0..2 {
                    moved.state.players[i] = actions[i].apply(moved.state.players[i]);
                }
                let before = moved.state.stag_distance();
                moved.move_stag();
                assert!(moved.state.stag_distance() <= before);
                let step = e.step_actions(actions);
                for r in step.rewards {
                    assert!([5.0, 2.0, -2.0, 0.0].contains(&r));
                }
            }
        }
    }

    #[test]
    fn reset_is_seeded_and_distinct() {
        let mut a = StagHunt::new(StagHuntConfig::default()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.reset(5), b.reset(5));
        assert_eq!(a.state(), b.state());
        for seed in 0..1000 {
            a.reset(seed);
            assert!(a.state().all_distinct());
            assert!(a.state().in_bounds());
        }
    }

    #[test]
    fn grid_codes_match_positions() {
        let e = env([(0, 0), (1, 1)], (2, 2), [(3, 3), (4, 4)]);
        let g = e.state().grid();
        assert_eq!(g[0][0], CELL_PLAYER);
        assert_eq!(g[2][2], CELL_STAG);
        assert_eq!(g[4][4], CELL_PLANT);
        assert_eq!(g[0][4], CELL_EMPTY);
    }

    #[test]
    fn observation_encoding() {
        let e = env([(2, 2), (2, 2)], (0, 4), [(2, 3), (4, 4)]);
        // Stag offset (-2, +2) -> 0*5 + 4; plant sign (0, +) -> 5; partner (0, 0) -> 4;
        // centre cell -> wall code 1*3 + 1.
        assert_eq!(e.observe(Player::One), ((4 * 9 + 5) * 9 + 4) * 9 + 4);
        let corner = env([(4, 0), (2, 2)], (0, 4), [(2, 3), (4, 4)]);
        assert_eq!(corner.observe(Player::One) % 9, 2 * 3);
        assert!(e.observe(Player::Two) < e.num_observations());
    }
}
