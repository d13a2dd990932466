//! Fixed-point dynamics on two-player normal-form games: stochastic
//! fictitious play with risk-averse best responses, and the fictitious-play
//! baselines (Nash, trembling hand, logit quantal response), uniform play and
//! best-response self-play.

mod fp;
mod sfp;

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::game::{Game, MixedStrategy, Player};
use crate::qp;
use crate::risk::{self, RiskProfile};

pub use fp::{fp_nash, fp_qre, fp_thpe, self_play, softmax, uniform_profile};
pub use sfp::{sfp_rae, sfp_rae_with};

/// Consecutive small-distance iterations required to declare convergence.
pub const DEFAULT_PATIENCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverId {
    Rae,
    Nash,
    Thpe,
    Qre,
    Uniform,
    SelfPlay,
}

impl SolverId {
    pub const ALL: [SolverId; 6] = [
        SolverId::Rae,
        SolverId::Nash,
        SolverId::Thpe,
        SolverId::Qre,
        SolverId::Uniform,
        SolverId::SelfPlay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverId::Rae => "rae",
            SolverId::Nash => "nash",
            SolverId::Thpe => "thpe",
            SolverId::Qre => "qre",
            SolverId::Uniform => "uniform",
            SolverId::SelfPlay => "selfplay",
        }
    }
}

impl std::fmt::Display for SolverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.name() == s.to_ascii_lowercase())
            .ok_or_else(|| crate::Error::Config(format!("unknown solver '{s}'")))
    }
}

/// Iteration controls shared by every fictitious-play style solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterOptions {
    pub max_iters: usize,
    pub conv_tol: f64,
    /// Consecutive iterations with both players' distance ≤ `conv_tol`.
    pub patience: usize,
    /// Stop as soon as convergence is declared. When false the run always
    /// lasts `max_iters` iterations (useful for fixed-length diagnostics).
    pub early_stop: bool,
}

impl IterOptions {
    pub fn new(max_iters: usize, conv_tol: f64) -> Self {
        IterOptions {
            max_iters,
            conv_tol,
            patience: DEFAULT_PATIENCE,
            early_stop: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(crate::Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.conv_tol >= 0.0) {
            return Err(crate::Error::Config(format!(
                "conv_tol must be non-negative, got {}",
                self.conv_tol
            )));
        }
        if self.patience == 0 {
            return Err(crate::Error::Config("patience must be at least 1".into()));
        }
        Ok(())
    }
}

/// Solver parameters recorded with a profile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolverParams {
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub tremble: Option<f64>,
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    pub strategies: [MixedStrategy; 2],
    pub solver: SolverId,
    pub params: SolverParams,
    pub converged: bool,
    pub final_distance: f64,
}

impl EquilibriumProfile {
    pub fn strategy(&self, player: Player) -> &MixedStrategy {
        &self.strategies[player.index()]
    }

    /// `(EU, UVar)` of `player` under this profile.
    pub fn mean_variance(&self, game: &Game, player: Player) -> Result<(f64, f64)> {
        risk::player_mean_variance(game, player, self.strategy(player), self.strategy(player.opponent()))
    }

    /// `(EU, UVar)` averaged over both players.
    pub fn average_mean_variance(&self, game: &Game) -> Result<(f64, f64)> {
        let (e1, v1) = self.mean_variance(game, Player::One)?;
        let (e2, v2) = self.mean_variance(game, Player::Two)?;
        Ok((0.5 * (e1 + e2), 0.5 * (v1 + v2)))
    }
}

/// Per-iteration record of a fictitious-play run. Index `t - 1` holds
/// iteration `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    /// Time averages `Z_t` of the observed strategies, after iteration `t`.
    pub beliefs: Vec<[MixedStrategy; 2]>,
    /// Strategies `σ_t` played at iteration `t`.
    pub observed: Vec<[MixedStrategy; 2]>,
    /// Euclidean distance from `σ_{t-1}` to `σ_t` (with `σ_0 = Z_0`).
    pub distances: Vec<[f64; 2]>,
    pub iterations_run: usize,
}

impl SolverTrace {
    /// Write the trace as CSV with columns
    /// `iteration,player,distance,entropy,eu,var`; `eu` and `var` are the
    /// observed strategy's mean and variance against the opponent's observed
    /// strategy in the same iteration.
    pub fn write_csv<W: Write>(&self, game: &Game, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER).map_err(csv_err)?;
        for (t, (obs, dist)) in self.observed.iter().zip(&self.distances).enumerate() {
            for player in Player::BOTH {
                let i = player.index();
                let (eu, var) = risk::player_mean_variance(game, player, &obs[i], &obs[1 - i])?;
                w.write_record([
                    (t + 1).to_string(),
                    (i + 1).to_string(),
                    dist[i].to_string(),
                    obs[i].entropy().to_string(),
                    eu.to_string(),
                    var.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub const TRACE_HEADER: [&str; 6] = ["iteration", "player", "distance", "entropy", "eu", "var"];

fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::Io(io),
        other => crate::Error::Validation(format!("{other:?}")),
    }
}

/// Largest gain available to either player by deviating to a pure action,
/// measured in expected utility. Zero at a Nash equilibrium.
pub fn exploitability(game: &Game, strategies: &[MixedStrategy; 2]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for player in Player::BOTH {
        let i = player.index();
        let means = risk::action_means(&strategies[1 - i], game.payoff(player))?;
        let achieved = means.dot(&strategies[i].to_dvector());
        let best = means.max();
        worst = worst.max(best - achieved);
    }
    Ok(worst.max(0.0))
}

/// For each player, how much total utility an exact risk-averse best
/// response to the opponent's strategy gains over the strategy played.
/// Both entries are (numerically) zero exactly at a risk-averse equilibrium.
pub fn best_response_gaps(game: &Game, strategies: &[MixedStrategy; 2], profile: &RiskProfile) -> Result<[f64; 2]> {
    let mut gaps = [0.0; 2];
    for player in Player::BOTH {
        let i = player.index();
        let m = game.payoff(player);
        let br = qp::risk_averse_best_response(&strategies[1 - i], m, profile, qp::DEFAULT_TOL)?;
        let achieved = risk::total_utility(&strategies[i], &strategies[1 - i], m, profile)?;
        gaps[i] = (br.objective_value - achieved).max(0.0);
    }
    Ok(gaps)
}

pub(crate) struct FpOutcome {
    pub trace: SolverTrace,
    /// Profile accepted by the certifier, if convergence was declared.
    pub certified: Option<[MixedStrategy; 2]>,
    pub final_distance: f64,
}

/// Shared fictitious-play loop. `respond(player, opponent_belief)` produces
/// the observed strategy of `player` for the next iteration. When the
/// observed strategies have been stable for `patience` iterations,
/// `certify(observed)` either returns the converged profile or rejects the
/// streak, in which case iteration continues.
pub(crate) fn run_fictitious_play(
    game: &Game,
    opts: &IterOptions,
    mut respond: impl FnMut(Player, &MixedStrategy) -> Result<MixedStrategy>,
    mut certify: impl FnMut(&[MixedStrategy; 2]) -> Result<Option<[MixedStrategy; 2]>>,
) -> Result<FpOutcome> {
    opts.validate()?;
    let mut beliefs = [
        MixedStrategy::uniform(game.num_actions(Player::One)),
        MixedStrategy::uniform(game.num_actions(Player::Two)),
    ];
    let mut previous = beliefs.clone();
    let mut trace = SolverTrace::default();
    let mut streak = 0;
    let mut certified = None;
    let mut final_distance = f64::INFINITY;

    for t in 1..=opts.max_iters {
        let s1 = respond(Player::One, &beliefs[1])?;
        // Symmetric game, identical beliefs: the second response is the same
        // computation, so reuse it.
        let s2 = if game.is_symmetric() && beliefs[0] == beliefs[1] {
            s1.clone()
        } else {
            respond(Player::Two, &beliefs[0])?
        };
        let observed = [s1, s2];
        let dist = [observed[0].distance(&previous[0]), observed[1].distance(&previous[1])];
        for i in 0..2 {
            beliefs[i] = update_belief(&beliefs[i], &observed[i], t);
        }
        final_distance = dist[0].max(dist[1]);
        if final_distance <= opts.conv_tol {
            streak += 1;
        } else {
            streak = 0;
        }
        trace.beliefs.push(beliefs.clone());
        trace.observed.push(observed.clone());
        trace.distances.push(dist);
        trace.iterations_run = t;
        if streak >= opts.patience && certified.is_none() {
            certified = certify(&observed)?;
            if certified.is_none() {
                streak = 0;
            } else if opts.early_stop {
                break;
            }
        }
        previous = observed;
    }
    Ok(FpOutcome {
        trace,
        certified,
        final_distance,
    })
}

/// `Z_t = Z_{t-1} + (σ_t − Z_{t-1}) / t`, with `Z_1 = σ_1` exactly.
pub(crate) fn update_belief(z: &MixedStrategy, sigma: &MixedStrategy, t: usize) -> MixedStrategy {
    if t == 1 {
        return sigma.clone();
    }
    let step = 1.0 / t as f64;
    let probs = z
        .probs()
        .iter()
        .zip(sigma.probs())
        .map(|(&zi, &si)| zi + (si - zi) * step)
        .collect();
    MixedStrategy::from_vec_unchecked(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Game;
    use nalgebra::DMatrix;

    fn identity() -> Game {
        Game::symmetric(DMatrix::identity(2, 2)).unwrap()
    }

    fn s(p: &[f64]) -> MixedStrategy {
        MixedStrategy::new(p.to_vec()).unwrap()
    }

    #[test]
    fn exploitability_examples() {
        let pennies = Game::asymmetric(
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
        )
        .unwrap();
        let u = MixedStrategy::uniform(2);
        assert_eq!(exploitability(&pennies, &[u.clone(), u.clone()]).unwrap(), 0.0);
        let e0 = MixedStrategy::pure(2, 0);
        assert_eq!(exploitability(&identity(), &[e0.clone(), e0]).unwrap(), 0.0);
        // BR value 0.9, achieved 0.9² + 0.1² = 0.82.
        let p = s(&[0.9, 0.1]);
        let x = exploitability(&identity(), &[p.clone(), p]).unwrap();
        assert!((x - 0.08).abs() < 1e-12);
    }

    #[test]
    fn belief_update_is_running_mean() {
        let a = s(&[1.0, 0.0]);
        let b = s(&[0.0, 1.0]);
        let z1 = update_belief(&MixedStrategy::uniform(2), &a, 1);
        assert_eq!(z1, a);
        let z2 = update_belief(&z1, &b, 2);
        let z3 = update_belief(&z2, &b, 3);
        assert!((z3.probs()[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn solver_names_round_trip() {
        for id in SolverId::ALL {
            assert_eq!(id.name().parse::<SolverId>().unwrap(), id);
        }
        assert!("bogus".parse::<SolverId>().is_err());
    }

    #[test]
    fn trace_csv_has_two_rows_per_iteration() {
        let (_, trace) = fp_nash(&identity(), &IterOptions::new(10, 1e-9)).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&identity(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "iteration,player,distance,entropy,eu,var");
        assert_eq!(lines.count(), 2 * trace.iterations_run);
    }
}
