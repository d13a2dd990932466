//! Desk-scale experiments. Each has a `Config` with documented keys,
//! a `run` returning in-memory results, and a `write` producing files.

pub mod frontier;
pub mod psro_nfg;
pub mod qre_failure;
pub mod sfp_robustness;
pub mod stag_hunt;

use serde::Serialize;

use rae_core::risk::RiskProfile;
use rae_core::solvers::{self, EquilibriumProfile, IterOptions, SolverId, SolverTrace};
use rae_core::{Game, Result};

/// Parameters shared by the normal-form solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveSettings {
    pub gamma: f64,
    pub epsilon: f64,
    pub tremble: f64,
    pub temperature: f64,
    pub iterations: usize,
    pub conv_tol: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            gamma: 1.0,
            epsilon: rae_core::risk::DEFAULT_EPSILON,
            tremble: 0.001,
            temperature: 1.0,
            iterations: 100,
            conv_tol: 1e-3,
        }
    }
}

impl SolveSettings {
    pub fn options(&self) -> IterOptions {
        IterOptions::new(self.iterations, self.conv_tol)
    }

    pub fn profile(&self) -> Result<RiskProfile> {
        RiskProfile::new(self.gamma, self.epsilon)
    }
}

/// Run one solver. The uniform baseline has no trace.
pub fn solve(game: &Game, solver: SolverId, s: &SolveSettings) -> Result<(EquilibriumProfile, Option<SolverTrace>)> {
    let opts = s.options();
    let (eq, trace) = match solver {
        SolverId::Rae => solvers::sfp_rae_with(game, &s.profile()?, &opts)?,
        SolverId::Nash => solvers::fp_nash(game, &opts)?,
        SolverId::Thpe => solvers::fp_thpe(game, s.tremble, &opts)?,
        SolverId::Qre => solvers::fp_qre(game, s.temperature, &opts)?,
        SolverId::SelfPlay => solvers::self_play(game, &opts)?,
        SolverId::Uniform => return Ok((solvers::uniform_profile(game), None)),
    };
    Ok((eq, Some(trace)))
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }
}
