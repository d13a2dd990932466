//! Mean-variance utility of a mixed strategy against an opponent strategy.
//!
//! Every function takes the owner's payoff matrix indexed
//! `[own action, opponent action]`, so the same code serves symmetric games
//! (shared matrix) and asymmetric games (`Game::payoff(player)`).
//!
//! The risk term is the variance `σᵀ Σ σ`, not its square root: the best
//! response in [`crate::qp`] relies on the objective being quadratic in `σ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_floor, Game, MixedStrategy, PayoffMatrix, Player};

/// Negative quadratic forms down to this value are rounding noise.
pub const VARIANCE_CLAMP_TOL: f64 = 1e-8;

/// Default probability floor for risk-averse strategies.
pub const DEFAULT_EPSILON: f64 = 0.001;

/// Risk-aversion weight `gamma` and per-action probability floor `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub gamma: f64,
    pub epsilon: f64,
}

impl RiskProfile {
    pub fn new(gamma: f64, epsilon: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Config(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !(epsilon.is_finite() && (0.0..1.0).contains(&epsilon)) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1), got {epsilon}")));
        }
        Ok(RiskProfile { gamma, epsilon })
    }

    /// Risk-neutral profile with no floor.
    pub fn neutral() -> Self {
        RiskProfile {
            gamma: 0.0,
            epsilon: 0.0,
        }
    }

    /// Fails unless `epsilon * num_actions < 1`.
    pub fn check_actions(&self, num_actions: usize) -> Result<()> {
        check_floor(num_actions, self.epsilon)
    }
}

/// Opponent-weighted covariance of the owner's action payoffs.
///
/// Entry `(j, k)` is `Σ_d ς(d) (M[j][d] - M̄_j)(M[k][d] - M̄_k)` with
/// `M̄ = M ς`: the covariance of actions `j` and `k` when the opponent
/// action `d` is drawn from `ς`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCovariance {
    matrix: DMatrix<f64>,
    opponent_strategy: MixedStrategy,
}

impl WeightedCovariance {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn opponent_strategy(&self) -> &MixedStrategy {
        &self.opponent_strategy
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_opponent(varsigma: &MixedStrategy, m: &PayoffMatrix) -> Result<()> {
    if varsigma.len() != m.ncols() {
        return Err(Error::Validation(format!(
            "opponent strategy has {} entries, payoff matrix has {} columns",
            varsigma.len(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_own(sigma: &MixedStrategy, m: &PayoffMatrix) -> Result<()> {
    if sigma.len() != m.nrows() {
        return Err(Error::Validation(format!(
            "strategy has {} entries, payoff matrix has {} rows",
            sigma.len(),
            m.nrows()
        )));
    }
    Ok(())
}

/// `σᵀ M ς`.
pub fn expected_utility(sigma: &MixedStrategy, varsigma: &MixedStrategy, m: &PayoffMatrix) -> Result<f64> {
    check_own(sigma, m)?;
    let means = action_means(varsigma, m)?;
    Ok(sigma.to_dvector().dot(&means))
}

/// Expected payoff of every own action against `ς`, i.e. `M ς`.
pub fn action_means(varsigma: &MixedStrategy, m: &PayoffMatrix) -> Result<DVector<f64>> {
    check_opponent(varsigma, m)?;
    Ok(m * varsigma.to_dvector())
}

pub fn weighted_covariance(varsigma: &MixedStrategy, m: &PayoffMatrix) -> Result<WeightedCovariance> {
    let means = action_means(varsigma, m)?;
    let mut dev = m.clone();
    for (r, mean) in means.iter().enumerate() {
        for c in 0..dev.ncols() {
            dev[(r, c)] -= mean;
        }
    }
    let mut weighted = dev.clone();
    for (c, &w) in varsigma.probs().iter().enumerate() {
        weighted.column_mut(c).scale_mut(w);
    }
    let raw = &weighted * dev.transpose();
    // Exact symmetry: average the product with its transpose.
    let matrix = DMatrix::from_fn(raw.nrows(), raw.ncols(), |j, k| 0.5 * (raw[(j, k)] + raw[(k, j)]));
    Ok(WeightedCovariance {
        matrix,
        opponent_strategy: varsigma.clone(),
    })
}

/// `σᵀ Σ σ`, clamped to zero when rounding pushes it slightly negative.
pub fn strategy_variance(sigma: &MixedStrategy, cov: &WeightedCovariance) -> Result<f64> {
    if sigma.len() != cov.dim() {
        return Err(Error::Validation(format!(
            "strategy has {} entries, covariance is {}x{}",
            sigma.len(),
            cov.dim(),
            cov.dim()
        )));
    }
    clamp_variance(quadratic_form(sigma.probs(), cov.matrix()))
}

pub(crate) fn quadratic_form(x: &[f64], q: &DMatrix<f64>) -> f64 {
    let v = DVector::from_column_slice(x);
    v.dot(&(q * &v))
}

pub(crate) fn clamp_variance(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -VARIANCE_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("strategy variance {v:e} is negative")))
    }
}

/// Expected utility and variance of `σ` against `ς` in one pass.
pub fn mean_variance(sigma: &MixedStrategy, varsigma: &MixedStrategy, m: &PayoffMatrix) -> Result<(f64, f64)> {
    let eu = expected_utility(sigma, varsigma, m)?;
    let cov = weighted_covariance(varsigma, m)?;
    Ok((eu, strategy_variance(sigma, &cov)?))
}

/// `u(σ, ς) - γ Var(σ, ς)`.
pub fn total_utility(
    sigma: &MixedStrategy,
    varsigma: &MixedStrategy,
    m: &PayoffMatrix,
    profile: &RiskProfile,
) -> Result<f64> {
    let (eu, var) = mean_variance(sigma, varsigma, m)?;
    Ok(eu - profile.gamma * var)
}

/// Mean and variance for `player` in `game` when it plays `own` against `opponent`.
pub fn player_mean_variance(
    game: &Game,
    player: Player,
    own: &MixedStrategy,
    opponent: &MixedStrategy,
) -> Result<(f64, f64)> {
    mean_variance(own, opponent, game.payoff(player))
}

pub fn player_total_utility(
    game: &Game,
    player: Player,
    own: &MixedStrategy,
    opponent: &MixedStrategy,
    profile: &RiskProfile,
) -> Result<f64> {
    total_utility(own, opponent, game.payoff(player), profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity() -> PayoffMatrix {
        DMatrix::identity(2, 2)
    }

    fn s(p: &[f64]) -> MixedStrategy {
        MixedStrategy::new(p.to_vec()).unwrap()
    }

    #[test]
    fn expected_utility_examples() {
        let c = DMatrix::from_element(3, 3, 4.5);
        assert_eq!(
            expected_utility(&s(&[0.2, 0.3, 0.5]), &s(&[0.6, 0.1, 0.3]), &c).unwrap(),
            4.5
        );
        let half = s(&[0.5, 0.5]);
        assert_eq!(expected_utility(&half, &half, &identity()).unwrap(), 0.5);
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let eu = expected_utility(&MixedStrategy::pure(2, 1), &MixedStrategy::pure(3, 2), &m).unwrap();
        assert_eq!(eu, 6.0);
    }

    #[test]
    fn action_means_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 7.0, -2.0, 3.0]);
        assert_eq!(
            action_means(&MixedStrategy::pure(2, 1), &m).unwrap().as_slice(),
            &[7.0, 3.0]
        );
        assert_eq!(
            action_means(&s(&[0.5, 0.5]), &identity()).unwrap().as_slice(),
            &[0.5, 0.5]
        );
        let c = DMatrix::from_element(2, 2, -1.0);
        assert_eq!(action_means(&s(&[0.3, 0.7]), &c).unwrap().as_slice(), &[-1.0, -1.0]);
    }

    #[test]
    fn covariance_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 7.0, -2.0, 3.0]);
        let cov = weighted_covariance(&MixedStrategy::pure(2, 0), &m).unwrap();
        assert!(cov.matrix().iter().all(|&v| v == 0.0));

        let cov = weighted_covariance(&s(&[0.5, 0.5]), &identity()).unwrap();
        assert_eq!(
            cov.matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25])
        );

        let flat_rows = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, -4.0, -4.0, -4.0]);
        let cov = weighted_covariance(&s(&[0.2, 0.3, 0.5]), &flat_rows).unwrap();
        assert!(cov.matrix().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn variance_examples() {
        let zero = weighted_covariance(&MixedStrategy::pure(2, 1), &identity()).unwrap();
        assert_eq!(strategy_variance(&s(&[0.3, 0.7]), &zero).unwrap(), 0.0);
        let cov = weighted_covariance(&s(&[0.5, 0.5]), &identity()).unwrap();
        assert_eq!(strategy_variance(&s(&[1.0, 0.0]), &cov).unwrap(), 0.25);
        assert_eq!(strategy_variance(&s(&[0.5, 0.5]), &cov).unwrap(), 0.0);
    }

    #[test]
    fn total_utility_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, 0.5, 2.0]);
        let (a, b) = (s(&[0.4, 0.6]), s(&[0.9, 0.1]));
        let neutral = RiskProfile::new(0.0, 0.0).unwrap();
        assert_eq!(
            total_utility(&a, &b, &m, &neutral).unwrap(),
            expected_utility(&a, &b, &m).unwrap()
        );
        let half = s(&[0.5, 0.5]);
        let r = total_utility(&half, &half, &identity(), &RiskProfile::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(r, 0.5);
    }

    #[test]
    fn dimension_mismatch_is_validation_error() {
        let m = identity();
        let three = MixedStrategy::uniform(3);
        let two = MixedStrategy::uniform(2);
        assert!(matches!(expected_utility(&three, &two, &m), Err(Error::Validation(_))));
        assert!(matches!(action_means(&three, &m), Err(Error::Validation(_))));
        assert!(matches!(weighted_covariance(&three, &m), Err(Error::Validation(_))));
        let cov = weighted_covariance(&two, &m).unwrap();
        assert!(matches!(strategy_variance(&three, &cov), Err(Error::Validation(_))));
    }

    #[test]
    fn clamp_rules() {
        assert_eq!(clamp_variance(-1e-12).unwrap(), 0.0);
        assert_eq!(clamp_variance(0.3).unwrap(), 0.3);
        assert!(matches!(clamp_variance(-1e-3), Err(Error::Numerical(_))));
    }

    #[test]
    fn profile_validation() {
        assert!(RiskProfile::new(-1.0, 0.0).is_err());
        assert!(RiskProfile::new(1.0, 1.0).is_err());
        let p = RiskProfile::new(1.0, 0.2).unwrap();
        assert!(p.check_actions(4).is_ok());
        assert!(p.check_actions(5).is_err());
    }
}
