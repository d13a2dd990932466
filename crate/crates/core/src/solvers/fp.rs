use super::{run_fictitious_play, update_belief, EquilibriumProfile, IterOptions, SolverId, SolverParams, SolverTrace};
use crate::error::{Error, Result};
use crate::game::{argmax, check_floor, Game, MixedStrategy, Player};
use crate::risk;

fn accept(observed: &[MixedStrategy; 2]) -> Result<Option<[MixedStrategy; 2]>> {
    Ok(Some(observed.clone()))
}

fn pure_best_response(game: &Game, player: Player, opponent: &MixedStrategy) -> Result<usize> {
    let means = risk::action_means(opponent, game.payoff(player))?;
    Ok(argmax(means.as_slice()))
}

fn finish(solver: SolverId, params: SolverParams, outcome: super::FpOutcome) -> (EquilibriumProfile, SolverTrace) {
    let strategies = outcome
        .trace
        .beliefs
        .last()
        .cloned()
        .expect("fictitious play runs at least one iteration");
    let profile = EquilibriumProfile {
        strategies,
        solver,
        params,
        converged: outcome.certified.is_some(),
        final_distance: outcome.final_distance,
    };
    (profile, outcome.trace)
}

/// Classical fictitious play: exact best responses (lowest index on ties)
/// to the opponent's time average. The profile is the final pair of time
/// averages.
pub fn fp_nash(game: &Game, opts: &IterOptions) -> Result<(EquilibriumProfile, SolverTrace)> {
    let outcome = run_fictitious_play(
        game,
        opts,
        |player, belief| {
            let a = pure_best_response(game, player, belief)?;
            Ok(MixedStrategy::pure(game.num_actions(player), a))
        },
        accept,
    )?;
    Ok(finish(SolverId::Nash, SolverParams::default(), outcome))
}

/// Fictitious play with trembling-hand best responses: every non-best action
/// keeps probability `tremble`.
pub fn fp_thpe(game: &Game, tremble: f64, opts: &IterOptions) -> Result<(EquilibriumProfile, SolverTrace)> {
    if !(tremble >= 0.0) {
        return Err(Error::Config(format!("tremble must be non-negative, got {tremble}")));
    }
    for player in Player::BOTH {
        check_floor(game.num_actions(player), tremble)?;
    }
    let outcome = run_fictitious_play(
        game,
        opts,
        |player, belief| {
            let a = pure_best_response(game, player, belief)?;
            MixedStrategy::floored_pure(game.num_actions(player), a, tremble)
        },
        accept,
    )?;
    let params = SolverParams {
        tremble: Some(tremble),
        ..Default::default()
    };
    Ok(finish(SolverId::Thpe, params, outcome))
}

/// `softmax(λ·values)`, shifted by the maximum so large values cannot
/// overflow.
pub fn softmax(values: &[f64], temperature: f64) -> MixedStrategy {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = values.iter().map(|v| (temperature * (v - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    MixedStrategy::from_vec_unchecked(weights.into_iter().map(|w| w / total).collect())
}

/// Fictitious play with logit quantal responses `softmax(λ·M Z)`.
pub fn fp_qre(game: &Game, temperature: f64, opts: &IterOptions) -> Result<(EquilibriumProfile, SolverTrace)> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::Config(format!(
            "temperature must be finite and non-negative, got {temperature}"
        )));
    }
    let outcome = run_fictitious_play(
        game,
        opts,
        |player, belief| {
            let means = risk::action_means(belief, game.payoff(player))?;
            Ok(softmax(means.as_slice(), temperature))
        },
        accept,
    )?;
    let params = SolverParams {
        temperature: Some(temperature),
        ..Default::default()
    };
    Ok(finish(SolverId::Qre, params, outcome))
}

/// Both players uniform.
pub fn uniform_profile(game: &Game) -> EquilibriumProfile {
    EquilibriumProfile {
        strategies: [
            MixedStrategy::uniform(game.num_actions(Player::One)),
            MixedStrategy::uniform(game.num_actions(Player::Two)),
        ],
        solver: SolverId::Uniform,
        params: SolverParams::default(),
        converged: true,
        final_distance: 0.0,
    }
}

/// Best-response dynamics: each player best-responds to the opponent's most
/// recent strategy rather than its time average. The profile is the last
/// pair of observed strategies.
pub fn self_play(game: &Game, opts: &IterOptions) -> Result<(EquilibriumProfile, SolverTrace)> {
    opts.validate()?;
    let mut last = [
        MixedStrategy::uniform(game.num_actions(Player::One)),
        MixedStrategy::uniform(game.num_actions(Player::Two)),
    ];
    let mut beliefs = last.clone();
    let mut trace = SolverTrace::default();
    let mut streak = 0;
    let mut converged = false;
    let mut final_distance = f64::INFINITY;
    for t in 1..=opts.max_iters {
        let mut next = last.clone();
        for player in Player::BOTH {
            let i = player.index();
            let a = pure_best_response(game, player, &last[1 - i])?;
            next[i] = MixedStrategy::pure(game.num_actions(player), a);
        }
        let dist = [next[0].distance(&last[0]), next[1].distance(&last[1])];
        for i in 0..2 {
            beliefs[i] = update_belief(&beliefs[i], &next[i], t);
        }
        final_distance = dist[0].max(dist[1]);
        streak = if final_distance <= opts.conv_tol { streak + 1 } else { 0 };
        trace.beliefs.push(beliefs.clone());
        trace.observed.push(next.clone());
        trace.distances.push(dist);
        trace.iterations_run = t;
        last = next;
        if streak >= opts.patience {
            converged = true;
            if opts.early_stop {
                break;
            }
        }
    }
    let profile = EquilibriumProfile {
        strategies: last,
        solver: SolverId::SelfPlay,
        params: SolverParams::default(),
        converged,
        final_distance,
    };
    Ok((profile, trace))
}
