//! PSRO with the exact best-response oracle on generated coordination
//! games, tracking the lifted meta-mixture after every meta-solve.
//!
//! Config keys: `num_actions` (50), `seeds` (0..3), `solvers`
//! (rae,nash,uniform), `iterations` (15), `gamma` (1), `epsilon` (0.001),
//! `lambda` (0, oracle variance aversion for the RAE run), `tremble`
//! (0.001), `temperature` (1), `meta_iters` (100), `meta_conv_tol` (0.001).

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::KvConfig;
use crate::manifest::Manifest;
use crate::output;
use rae_core::envs::NfgEnv;
use rae_core::game::{generate_coordination_game, GameGenConfig};
use rae_core::psro::{lift_mixture, psro_run, MetaSolver, OracleConfig, PsroConfig, PsroOutcome};
use rae_core::risk::{player_mean_variance, RiskProfile};
use rae_core::solvers::{exploitability, SolverId};
use rae_core::{Error, Game, MixedStrategy, Player, Result};

pub const HEADER: [&str; 8] = [
    "seed",
    "solver",
    "iteration",
    "population_size",
    "eu",
    "uvar",
    "exploitability",
    "meta_converged",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsroNfgConfig {
    pub num_actions: usize,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverId>,
    pub iterations: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub tremble: f64,
    pub temperature: f64,
    pub meta_iters: usize,
    pub meta_conv_tol: f64,
}

impl Default for PsroNfgConfig {
    fn default() -> Self {
        PsroNfgConfig {
            num_actions: 50,
            seeds: (0..3).collect(),
            solvers: vec![SolverId::Rae, SolverId::Nash, SolverId::Uniform],
            iterations: 15,
            gamma: 1.0,
            epsilon: 0.001,
            lambda: 0.0,
            tremble: 0.001,
            temperature: 1.0,
            meta_iters: 100,
            meta_conv_tol: 1e-3,
        }
    }
}

impl PsroNfgConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = PsroNfgConfig {
            num_actions: kv.get("num_actions", d.num_actions)?,
            seeds: kv.get_seeds("seeds", d.seeds)?,
            solvers: kv.get_list("solvers", d.solvers)?,
            iterations: kv.get("iterations", d.iterations)?,
            gamma: kv.get("gamma", d.gamma)?,
            epsilon: kv.get("epsilon", d.epsilon)?,
            lambda: kv.get("lambda", d.lambda)?,
            tremble: kv.get("tremble", d.tremble)?,
            temperature: kv.get("temperature", d.temperature)?,
            meta_iters: kv.get("meta_iters", d.meta_iters)?,
            meta_conv_tol: kv.get("meta_conv_tol", d.meta_conv_tol)?,
        };
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.solvers.is_empty() {
            return Err(Error::Config("seeds and solvers must be non-empty".into()));
        }
        RiskProfile::new(self.gamma, self.epsilon)?;
        self.psro_config(SolverId::Nash, 0)?.validate()
    }

    pub fn psro_config(&self, solver: SolverId, seed: u64) -> Result<PsroConfig> {
        let meta = match solver {
            SolverId::Rae => MetaSolver::Rae(RiskProfile::new(self.gamma, self.epsilon)?),
            SolverId::Nash => MetaSolver::Nash,
            SolverId::Uniform => MetaSolver::Uniform,
            SolverId::SelfPlay => MetaSolver::SelfPlay,
            SolverId::Thpe => MetaSolver::Thpe(self.tremble),
            SolverId::Qre => MetaSolver::Qre(self.temperature),
        };
        let mut cfg = PsroConfig::new(meta, OracleConfig::exact(self.lambda), self.iterations, seed);
        cfg.meta_iters = self.meta_iters;
        cfg.meta_conv_tol = self.meta_conv_tol;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsroNfgRow {
    pub seed: u64,
    pub solver: SolverId,
    pub iteration: usize,
    pub population_size: usize,
    /// Averaged over both players.
    pub eu: f64,
    pub uvar: f64,
    pub exploitability: f64,
    pub meta_converged: bool,
}

#[derive(Debug, Clone)]
pub struct PsroNfgRun {
    pub seed: u64,
    pub solver: SolverId,
    pub outcome: PsroOutcome,
    pub rows: Vec<PsroNfgRow>,
}

#[derive(Debug, Clone)]
pub struct PsroNfgResults {
    pub runs: Vec<PsroNfgRun>,
}

impl PsroNfgResults {
    pub fn rows(&self) -> impl Iterator<Item = &PsroNfgRow> {
        self.runs.iter().flat_map(|r| &r.rows)
    }

    pub fn write(&self, cfg: &PsroNfgConfig, dir: &Path) -> Result<()> {
        output::create_dir(dir)?;
        let mut w = output::csv_file(dir, "psro_nfg.csv", &HEADER)?;
        for r in self.rows() {
            output::write_row(
                &mut w,
                [
                    r.seed.to_string(),
                    r.solver.to_string(),
                    r.iteration.to_string(),
                    r.population_size.to_string(),
                    r.eu.to_string(),
                    r.uvar.to_string(),
                    r.exploitability.to_string(),
                    r.meta_converged.to_string(),
                ],
            )?;
        }
        output::finish_csv(w)?;
        let mut outputs = vec!["psro_nfg.csv".to_string()];
        let logs = dir.join("logs");
        output::create_dir(&logs)?;
        for run in &self.runs {
            let name = format!("psro_{}_seed{}.jsonl", run.solver, run.seed);
            let mut buf = Vec::new();
            run.outcome.write_log(&mut buf)?;
            output::write_text(&logs, &name, &String::from_utf8_lossy(&buf))?;
            outputs.push(format!("logs/{name}"));
        }
        Manifest::new("psro", cfg, &cfg.seeds, outputs).write(dir)
    }
}

fn lifted(outcome: &PsroOutcome, metas: &[Vec<f64>], player: Player, n: usize) -> Result<MixedStrategy> {
    let p = player.index().min(metas.len() - 1);
    let meta = MixedStrategy::new(metas[p].clone())?;
    let policies = &outcome.populations[player.index()].policies[..meta.len()];
    lift_mixture(policies, &meta, n)
}

fn rows_for(game: &Game, outcome: &PsroOutcome, seed: u64, solver: SolverId) -> Result<Vec<PsroNfgRow>> {
    let n = game.num_actions(Player::One);
    outcome
        .log
        .iter()
        .map(|rec| {
            let s = [
                lifted(outcome, &rec.meta_distributions, Player::One, n)?,
                lifted(outcome, &rec.meta_distributions, Player::Two, n)?,
            ];
            let (e1, v1) = player_mean_variance(game, Player::One, &s[0], &s[1])?;
            let (e2, v2) = player_mean_variance(game, Player::Two, &s[1], &s[0])?;
            Ok(PsroNfgRow {
                seed,
                solver,
                iteration: rec.iteration,
                population_size: rec.meta_distributions[0].len(),
                eu: 0.5 * (e1 + e2),
                uvar: 0.5 * (v1 + v2),
                exploitability: exploitability(game, &s)?,
                meta_converged: rec.meta_solver_converged,
            })
        })
        .collect()
}

pub fn run(cfg: &PsroNfgConfig) -> Result<PsroNfgResults> {
    cfg.validate()?;
    let jobs: Vec<(u64, SolverId)> = cfg
        .seeds
        .iter()
        .flat_map(|&seed| cfg.solvers.iter().map(move |&s| (seed, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(seed, solver)| {
            let game = generate_coordination_game(&GameGenConfig::new(cfg.num_actions, seed))?;
            let env = NfgEnv::new(game.clone());
            let outcome = psro_run(&env, &cfg.psro_config(solver, seed)?)?;
            let rows = rows_for(&game, &outcome, seed, solver)?;
            Ok(PsroNfgRun {
                seed,
                solver,
                outcome,
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PsroNfgResults { runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_meta_solve() {
        let cfg = PsroNfgConfig {
            num_actions: 8,
            seeds: vec![1],
            iterations: 4,
            ..PsroNfgConfig::default()
        };
        let res = run(&cfg).unwrap();
        assert_eq!(res.runs.len(), 3);
        for run in &res.runs {
            assert_eq!(run.rows.len(), cfg.iterations + 1);
            assert_eq!(run.rows.last().unwrap().population_size, cfg.iterations + 1);
            assert!(run.rows.iter().all(|r| r.uvar >= 0.0 && r.exploitability >= -1e-9));
        }
    }
}
