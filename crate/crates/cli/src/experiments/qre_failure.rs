//! Logit-QRE over a temperature sweep against RAE over a γ sweep on the
//! two-action risk dilemma.
//!
//! Config keys: `safe_payoff` (5), `coord_payoff` (20), `crash_payoff`
//! (-100), `temperatures` (0,0.1,0.2,0.5,1,2,5,10), `gammas`
//! (0.1,0.5,1,2,5), `epsilon` (0.001), `iterations` (100), `conv_tol`
//! (0.001), `seed` (0, recorded only: every solver here is deterministic).

use std::path::Path;

use serde::Serialize;

use super::{solve, SolveSettings};
use crate::config::KvConfig;
use crate::manifest::Manifest;
use crate::output;
use rae_core::game::make_risk_dilemma;
use rae_core::solvers::SolverId;
use rae_core::{Error, Game, Result};

pub const HEADER: [&str; 5] = ["solver", "param", "eu", "uvar", "converged"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QreFailureConfig {
    pub safe_payoff: f64,
    pub coord_payoff: f64,
    pub crash_payoff: f64,
    pub temperatures: Vec<f64>,
    pub gammas: Vec<f64>,
    pub epsilon: f64,
    pub iterations: usize,
    pub conv_tol: f64,
    pub seed: u64,
}

impl Default for QreFailureConfig {
    fn default() -> Self {
        QreFailureConfig {
            safe_payoff: 5.0,
            coord_payoff: 20.0,
            crash_payoff: -100.0,
            temperatures: vec![0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
            gammas: vec![0.1, 0.5, 1.0, 2.0, 5.0],
            epsilon: 0.001,
            iterations: 100,
            conv_tol: 1e-3,
            seed: 0,
        }
    }
}

impl QreFailureConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = QreFailureConfig {
            safe_payoff: kv.get("safe_payoff", d.safe_payoff)?,
            coord_payoff: kv.get("coord_payoff", d.coord_payoff)?,
            crash_payoff: kv.get("crash_payoff", d.crash_payoff)?,
            temperatures: kv.get_list("temperatures", d.temperatures)?,
            gammas: kv.get_list("gammas", d.gammas)?,
            epsilon: kv.get("epsilon", d.epsilon)?,
            iterations: kv.get("iterations", d.iterations)?,
            conv_tol: kv.get("conv_tol", d.conv_tol)?,
            seed: kv.get("seed", d.seed)?,
        };
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.is_empty() || self.gammas.is_empty() {
            return Err(Error::Config("temperatures and gammas must be non-empty".into()));
        }
        Ok(())
    }

    pub fn game(&self) -> Result<Game> {
        make_risk_dilemma(self.safe_payoff, self.coord_payoff, self.crash_payoff)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QreFailureRow {
    pub solver: SolverId,
    /// Temperature for QRE rows, γ for RAE rows.
    pub param: f64,
    pub eu: f64,
    pub uvar: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QreFailureResults {
    pub rows: Vec<QreFailureRow>,
}

impl QreFailureResults {
    pub fn qre(&self) -> impl Iterator<Item = &QreFailureRow> {
        self.rows.iter().filter(|r| r.solver == SolverId::Qre)
    }

    pub fn rae_at(&self, gamma: f64) -> Option<&QreFailureRow> {
        self.rows.iter().find(|r| r.solver == SolverId::Rae && r.param == gamma)
    }

    pub fn write(&self, cfg: &QreFailureConfig, dir: &Path) -> Result<()> {
        output::create_dir(dir)?;
        let mut w = output::csv_file(dir, "qre_failure.csv", &HEADER)?;
        for r in &self.rows {
            output::write_row(
                &mut w,
                [
                    r.solver.to_string(),
                    r.param.to_string(),
                    r.eu.to_string(),
                    r.uvar.to_string(),
                    r.converged.to_string(),
                ],
            )?;
        }
        output::finish_csv(w)?;
        Manifest::new(
            "qre_failure",
            cfg,
            std::slice::from_ref(&cfg.seed),
            vec!["qre_failure.csv".into()],
        )
        .write(dir)
    }
}

pub fn run(cfg: &QreFailureConfig) -> Result<QreFailureResults> {
    cfg.validate()?;
    let game = cfg.game()?;
    let base = SolveSettings {
        epsilon: cfg.epsilon,
        iterations: cfg.iterations,
        conv_tol: cfg.conv_tol,
        ..SolveSettings::default()
    };
    let mut rows = Vec::new();
    let mut push = |solver, param, s: SolveSettings| -> Result<()> {
        let (eq, _) = solve(&game, solver, &s)?;
        let (eu, uvar) = eq.average_mean_variance(&game)?;
        rows.push(QreFailureRow {
            solver,
            param,
            eu,
            uvar,
            converged: eq.converged,
        });
        Ok(())
    };
    for &temperature in &cfg.temperatures {
        push(SolverId::Qre, temperature, SolveSettings { temperature, ..base })?;
    }
    for &gamma in &cfg.gammas {
        push(SolverId::Rae, gamma, SolveSettings { gamma, ..base })?;
    }
    Ok(QreFailureResults { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rae_core::solvers::uniform_profile;

    #[test]
    fn zero_temperature_row_is_uniform() {
        let cfg = QreFailureConfig::default();
        let res = run(&cfg).unwrap();
        let game = cfg.game().unwrap();
        let (eu, uvar) = uniform_profile(&game).average_mean_variance(&game).unwrap();
        let row = res.qre().find(|r| r.param == 0.0).unwrap();
        assert_eq!((row.eu, row.uvar), (eu, uvar));
        assert_eq!(res.rows.len(), cfg.temperatures.len() + cfg.gammas.len());
    }
}
