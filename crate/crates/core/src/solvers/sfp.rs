use super::{
    best_response_gaps, run_fictitious_play, EquilibriumProfile, IterOptions, SolverId, SolverParams, SolverTrace,
};
use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::game::{Game, MixedStrategy, Player};
use crate::qp;
use crate::risk::RiskProfile;

const POLISH_ITERS: usize = 60;
const POLISH_DAMPING: f64 = 0.5;
const ANDERSON_DEPTH: usize = 5;
const POLISH_STEP_TOL: f64 = 1e-13;
/// Best-response gap a polished profile must reach to replace the observed one.
const POLISH_GAP_TOL: f64 = 1e-9;

/// Stochastic fictitious play with risk-averse best responses, stopping
/// after `max_iters` or once observed strategies stay within `conv_tol` for
/// [`super::DEFAULT_PATIENCE`] consecutive iterations.
pub fn sfp_rae(
    game: &Game,
    profile: &RiskProfile,
    max_iters: usize,
    conv_tol: f64,
) -> Result<(EquilibriumProfile, SolverTrace)> {
    sfp_rae_with(game, profile, &IterOptions::new(max_iters, conv_tol))
}

/// [`sfp_rae`] with full iteration control.
///
/// Each iteration both players solve the mean-variance best response to the
/// opponent's time-average strategy, then the averages absorb the new
/// strategies. A stable run of observed strategies is only a candidate: the
/// averages may still be drifting away from it. The candidate's limit is
/// sought by iterating exact best responses from the observed profile, and
/// convergence is declared only if that reaches a mutual best response;
/// otherwise the streak is discarded and play continues. Non-converged runs
/// return the last observed profile.
pub fn sfp_rae_with(
    game: &Game,
    profile: &RiskProfile,
    opts: &IterOptions,
) -> Result<(EquilibriumProfile, SolverTrace)> {
    for player in Player::BOTH {
        profile.check_actions(game.num_actions(player))?;
    }
    let mut warm: [Option<Vec<bool>>; 2] = [None, None];
    let outcome = run_fictitious_play(
        game,
        opts,
        |player, belief| {
            let i = player.index();
            let br = qp::best_response_from(
                belief,
                game.payoff(player),
                profile,
                qp::DEFAULT_TOL,
                warm[i].as_deref(),
            )?;
            warm[i] = Some(qp::working_set(&br.strategy, profile.epsilon));
            Ok(br.strategy)
        },
        |observed| polish(game, profile, observed.clone()),
    )?;
    let converged = outcome.certified.is_some();
    let strategies = match outcome.certified {
        Some(s) => s,
        None => outcome
            .trace
            .observed
            .last()
            .cloned()
            .expect("fictitious play runs at least one iteration"),
    };
    let result = EquilibriumProfile {
        strategies,
        solver: SolverId::Rae,
        params: SolverParams {
            gamma: Some(profile.gamma),
            epsilon: Some(profile.epsilon),
            ..Default::default()
        },
        converged,
        final_distance: outcome.final_distance,
    };
    Ok((result, outcome.trace))
}

fn best_responses(game: &Game, profile: &RiskProfile, x: &[MixedStrategy; 2]) -> Result<[MixedStrategy; 2]> {
    let br = |player: Player| -> Result<MixedStrategy> {
        let i = player.index();
        Ok(qp::risk_averse_best_response(&x[1 - i], game.payoff(player), profile, qp::DEFAULT_TOL)?.strategy)
    };
    let first = br(Player::One)?;
    let second = if game.is_symmetric() && x[0] == x[1] {
        first.clone()
    } else {
        br(Player::Two)?
    };
    Ok([first, second])
}

/// Search for the mutual best response nearest the observed profile:
/// Anderson-accelerated, damped best-response iteration from `start`.
/// Plain best-response iteration tends to two-cycle around interior
/// equilibria, and damping alone converges slowly. `Some` only if the end
/// point is a mutual best response.
fn polish(game: &Game, profile: &RiskProfile, start: [MixedStrategy; 2]) -> Result<Option<[MixedStrategy; 2]>> {
    let n1 = start[0].len();
    let split = |z: &DVector<f64>| -> [MixedStrategy; 2] {
        [
            MixedStrategy::from_vec_unchecked(z.rows(0, n1).iter().copied().collect()),
            MixedStrategy::from_vec_unchecked(z.rows(n1, z.len() - n1).iter().copied().collect()),
        ]
    };
    let join = |x: &[MixedStrategy; 2]| -> DVector<f64> {
        DVector::from_iterator(n1 + x[1].len(), x[0].probs().iter().chain(x[1].probs()).copied())
    };
    let floor = profile.epsilon;
    let project = |z: &DVector<f64>| -> DVector<f64> {
        let a = qp::project_floored_simplex(&z.rows(0, n1).into_owned(), floor);
        let b = qp::project_floored_simplex(&z.rows(n1, z.len() - n1).into_owned(), floor);
        DVector::from_iterator(z.len(), a.iter().chain(b.iter()).copied())
    };

    let mut z = join(&start);
    let mut history: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    for _ in 0..POLISH_ITERS {
        let f = join(&best_responses(game, profile, &split(&z))?) - &z;
        if f.amax() <= POLISH_STEP_TOL {
            break;
        }
        // Restart the acceleration whenever it made things worse.
        if history.last().is_some_and(|(_, prev)| f.norm() > prev.norm()) {
            history.clear();
        }
        let mut next = &z + &f * POLISH_DAMPING;
        if !history.is_empty() {
            let m = history.len();
            // Differences of successive iterates and residuals.
            let mut dz = DMatrix::zeros(z.len(), m);
            let mut df = DMatrix::zeros(z.len(), m);
            for k in 0..m {
                let (za, fa) = &history[k];
                let (zb, fb) = if k + 1 < m {
                    (&history[k + 1].0, &history[k + 1].1)
                } else {
                    (&z, &f)
                };
                dz.set_column(k, &(zb - za));
                df.set_column(k, &(fb - fa));
            }
            // Regularised least squares for the mixing coefficients.
            let mut normal = df.transpose() * &df;
            let reg = 1e-10 * (1.0 + normal.trace());
            for k in 0..m {
                normal[(k, k)] += reg;
            }
            if let Some(chol) = normal.cholesky() {
                let coef = chol.solve(&(df.transpose() * &f));
                let candidate = &next - (dz + df * POLISH_DAMPING) * coef;
                if candidate.iter().all(|v| v.is_finite()) {
                    next = candidate;
                }
            }
        }
        history.push((z.clone(), f));
        if history.len() > ANDERSON_DEPTH {
            history.remove(0);
        }
        z = project(&next);
    }
    let x = split(&z);
    let gaps = best_response_gaps(game, &x, profile)?;
    Ok((gaps[0].max(gaps[1]) <= POLISH_GAP_TOL).then_some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{generate_coordination_game, GameGenConfig};
    use nalgebra::DMatrix;

    #[test]
    fn one_action_converges_immediately() {
        let g = Game::symmetric(DMatrix::from_element(1, 1, 3.0)).unwrap();
        let p = RiskProfile::new(1.0, 0.001).unwrap();
        let (eq, trace) = sfp_rae(&g, &p, 100, 1e-6).unwrap();
        assert_eq!(eq.strategies[0].probs(), &[1.0]);
        assert_eq!(trace.distances[0], [0.0, 0.0]);
        assert!(eq.converged);
    }

    #[test]
    fn identity_game_fixed_point_is_mutual_best_response() {
        let g = Game::symmetric(DMatrix::identity(2, 2)).unwrap();
        let p = RiskProfile::new(1.0, 0.001).unwrap();
        let (eq, _) = sfp_rae(&g, &p, 500, 1e-6).unwrap();
        assert!(eq.converged);
        let gaps = best_response_gaps(&g, &eq.strategies, &p).unwrap();
        assert!(gaps[0] <= 1e-6 && gaps[1] <= 1e-6, "{gaps:?}");
        for s in &eq.strategies {
            assert!(s.is_floored(0.001));
        }
    }

    #[test]
    fn beliefs_match_recomputed_averages() {
        let g = generate_coordination_game(&GameGenConfig::new(6, 4)).unwrap();
        let p = RiskProfile::new(0.5, 0.001).unwrap();
        let mut opts = IterOptions::new(40, 1e-3);
        opts.early_stop = false;
        let (_, trace) = sfp_rae_with(&g, &p, &opts).unwrap();
        for t in 0..trace.iterations_run {
            for i in 0..2 {
                let n = trace.observed[t][i].len();
                for a in 0..n {
                    let mean = (0..=t).map(|u| trace.observed[u][i].probs()[a]).sum::<f64>() / (t + 1) as f64;
                    assert!((trace.beliefs[t][i].probs()[a] - mean).abs() < 1e-9);
                }
            }
        }
    }
}
