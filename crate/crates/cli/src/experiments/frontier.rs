//! Efficient frontier: RAE over a γ grid against the baselines on
//! generated coordination games.
//!
//! Config keys: `num_actions` (100), `seeds` (0..20), `gammas`
//! (0.05,0.1,0.5,1,5), `epsilon` (0.001), `iterations` (100), `conv_tol`
//! (0.001), `tremble` (0.001), `temperature` (1), `eu_slack` (0.05).

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{solve, SolveSettings};
use crate::config::KvConfig;
use crate::manifest::Manifest;
use crate::output::{self, opt};
use rae_core::game::{generate_coordination_game, GameGenConfig};
use rae_core::solvers::SolverId;
use rae_core::{Error, Result};

pub const HEADER: [&str; 6] = ["seed", "solver", "gamma", "eu", "uvar", "converged"];
pub const BASELINES: [SolverId; 4] = [SolverId::Nash, SolverId::Thpe, SolverId::Qre, SolverId::Uniform];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierConfig {
    pub num_actions: usize,
    pub seeds: Vec<u64>,
    pub gammas: Vec<f64>,
    pub epsilon: f64,
    pub iterations: usize,
    pub conv_tol: f64,
    pub tremble: f64,
    pub temperature: f64,
    /// Allowed EU shortfall, as a fraction of the game's payoff range.
    pub eu_slack: f64,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        FrontierConfig {
            num_actions: 100,
            seeds: (0..20).collect(),
            gammas: vec![0.05, 0.1, 0.5, 1.0, 5.0],
            epsilon: 0.001,
            iterations: 100,
            conv_tol: 1e-3,
            tremble: 0.001,
            temperature: 1.0,
            eu_slack: 0.05,
        }
    }
}

impl FrontierConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = FrontierConfig {
            num_actions: kv.get("num_actions", d.num_actions)?,
            seeds: kv.get_seeds("seeds", d.seeds)?,
            gammas: kv.get_list("gammas", d.gammas)?,
            epsilon: kv.get("epsilon", d.epsilon)?,
            iterations: kv.get("iterations", d.iterations)?,
            conv_tol: kv.get("conv_tol", d.conv_tol)?,
            tremble: kv.get("tremble", d.tremble)?,
            temperature: kv.get("temperature", d.temperature)?,
            eu_slack: kv.get("eu_slack", d.eu_slack)?,
        };
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("frontier needs at least one seed".into()));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::Config("gammas must be a non-empty list of values >= 0".into()));
        }
        Ok(())
    }

    fn settings(&self) -> SolveSettings {
        SolveSettings {
            gamma: 0.0,
            epsilon: self.epsilon,
            tremble: self.tremble,
            temperature: self.temperature,
            iterations: self.iterations,
            conv_tol: self.conv_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub seed: u64,
    pub solver: SolverId,
    pub gamma: Option<f64>,
    pub eu: f64,
    pub uvar: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFrontier {
    pub seed: u64,
    pub payoff_range: f64,
    /// RAE rows in γ order, then the baselines.
    pub rows: Vec<FrontierRow>,
}

impl SeedFrontier {
    pub fn rae(&self) -> impl Iterator<Item = &FrontierRow> {
        self.rows.iter().filter(|r| r.solver == SolverId::Rae)
    }

    pub fn baseline(&self, solver: SolverId) -> Option<&FrontierRow> {
        self.rows.iter().find(|r| r.solver == solver)
    }

    /// Some γ whose RAE solution keeps EU within `slack · range` of the
    /// baseline and has strictly lower UVar.
    pub fn dominates(&self, solver: SolverId, slack: f64) -> bool {
        let Some(b) = self.baseline(solver) else { return false };
        self.rae()
            .any(|r| r.eu >= b.eu - slack * self.payoff_range && r.uvar < b.uvar)
    }

    /// UVar never increases as γ grows (rows sorted by γ).
    pub fn rae_monotone(&self) -> bool {
        let mut rae: Vec<&FrontierRow> = self.rae().collect();
        rae.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).expect("finite gammas"));
        rae.windows(2).all(|w| w[1].uvar <= w[0].uvar)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierResults {
    pub seeds: Vec<SeedFrontier>,
}

impl FrontierResults {
    pub fn rows(&self) -> impl Iterator<Item = &FrontierRow> {
        self.seeds.iter().flat_map(|s| &s.rows)
    }

    /// Seeds on which RAE dominates `solver`.
    pub fn dominated_seeds(&self, solver: SolverId, slack: f64) -> usize {
        self.seeds.iter().filter(|s| s.dominates(solver, slack)).count()
    }

    pub fn monotone_seeds(&self) -> usize {
        self.seeds.iter().filter(|s| s.rae_monotone()).count()
    }

    pub fn write(&self, cfg: &FrontierConfig, dir: &Path) -> Result<()> {
        output::create_dir(dir)?;
        let mut w = output::csv_file(dir, "frontier.csv", &HEADER)?;
        for r in self.rows() {
            output::write_row(
                &mut w,
                [
                    r.seed.to_string(),
                    r.solver.to_string(),
                    opt(r.gamma),
                    r.eu.to_string(),
                    r.uvar.to_string(),
                    r.converged.to_string(),
                ],
            )?;
        }
        output::finish_csv(w)?;
        Manifest::new("frontier", cfg, &cfg.seeds, vec!["frontier.csv".into()]).write(dir)
    }
}

pub fn run_seed(cfg: &FrontierConfig, seed: u64) -> Result<SeedFrontier> {
    let game = generate_coordination_game(&GameGenConfig::new(cfg.num_actions, seed))?;
    let base = cfg.settings();
    let mut rows = Vec::with_capacity(cfg.gammas.len() + BASELINES.len());
    for &gamma in &cfg.gammas {
        let s = SolveSettings { gamma, ..base };
        let (eq, _) = solve(&game, SolverId::Rae, &s)?;
        let (eu, uvar) = eq.average_mean_variance(&game)?;
        rows.push(FrontierRow {
            seed,
            solver: SolverId::Rae,
            gamma: Some(gamma),
            eu,
            uvar,
            converged: eq.converged,
        });
    }
    for solver in BASELINES {
        let (eq, _) = solve(&game, solver, &base)?;
        let (eu, uvar) = eq.average_mean_variance(&game)?;
        rows.push(FrontierRow {
            seed,
            solver,
            gamma: None,
            eu,
            uvar,
            converged: eq.converged,
        });
    }
    Ok(SeedFrontier {
        seed,
        payoff_range: game.payoff_range(),
        rows,
    })
}

pub fn run(cfg: &FrontierConfig) -> Result<FrontierResults> {
    cfg.validate()?;
    let seeds = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrontierResults { seeds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FrontierConfig {
        FrontierConfig {
            num_actions: 6,
            seeds: vec![0, 1],
            gammas: vec![0.1, 1.0],
            ..FrontierConfig::default()
        }
    }

    #[test]
    fn row_count_is_seeds_times_solvers() {
        let cfg = small();
        let res = run(&cfg).unwrap();
        assert_eq!(res.rows().count(), 2 * (2 + 4));
        assert!(res.rows().all(|r| r.uvar >= 0.0));
    }

    #[test]
    fn dominance_needs_lower_variance_and_close_eu() {
        let row = |solver, gamma, eu, uvar| FrontierRow {
            seed: 0,
            solver,
            gamma,
            eu,
            uvar,
            converged: true,
        };
        let s = SeedFrontier {
            seed: 0,
            payoff_range: 10.0,
            rows: vec![
                row(SolverId::Rae, Some(0.1), 9.6, 2.0),
                row(SolverId::Rae, Some(1.0), 5.0, 0.5),
                row(SolverId::Nash, None, 10.0, 3.0),
                row(SolverId::Uniform, None, 10.0, 1.0),
            ],
        };
        assert!(s.dominates(SolverId::Nash, 0.05));
        assert!(!s.dominates(SolverId::Uniform, 0.05));
        assert!(!s.dominates(SolverId::Thpe, 0.05));
        assert!(s.rae_monotone());
    }

    #[test]
    fn config_keys_override_defaults() {
        let kv = KvConfig::parse("num_actions = 4\nseeds = 5..7\ngammas = 2").unwrap();
        let cfg = FrontierConfig::from_kv(&kv).unwrap();
        assert_eq!((cfg.num_actions, cfg.seeds, cfg.gammas), (4, vec![5, 6], vec![2.0]));
        assert!(FrontierConfig::from_kv(&KvConfig::parse("gamma = 1").unwrap()).is_err());
    }
}
