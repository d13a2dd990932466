//! PSRO populations on the grid-world stag hunt, one per meta-solver and
//! seed, evaluated against themselves and RAE against Nash.
//!
//! Config keys: `seeds` (0..5), `solvers` (rae,nash,uniform,selfplay,thpe,qre),
//! `psro_iterations` (6), `gamma` (0.15), `epsilon` (0.001), `lambda`
//! (0.15, used by the RAE run's oracle only), `tremble` (0.001),
//! `temperature` (1), `eval_episodes` (32), `test_episodes` (1000),
//! `meta_iters` (100), `meta_conv_tol` (0.001), `oracle_episodes` (300000),
//! `learning_rate` (4), `discount` (0.9), `batch_size` (20), `step_cap` (64).
//!
//! Event rates are per test episode and count both seats: a joint capture
//! is one event, each gathered plant and each gore is one event.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::KvConfig;
use crate::manifest::Manifest;
use crate::output;
use rae_core::envs::{StagHunt, StagHuntConfig, GRID, OBS_ENCODING_VERSION};
use rae_core::psro::{
    cross_population_eval, psro_run, CrossEvalSummary, MetaSolver, OracleConfig, OracleKind, PsroConfig, RunLogRecord,
};
use rae_core::risk::RiskProfile;
use rae_core::solvers::SolverId;
use rae_core::{rng, Error, Result};

pub const EVENTS_HEADER: [&str; 16] = [
    "seed",
    "population",
    "opponent",
    "episodes",
    "plant_rate",
    "capture_rate",
    "gore_rate",
    "plants_seat1",
    "plants_seat2",
    "captures",
    "gores_seat1",
    "gores_seat2",
    "mean_return_seat1",
    "mean_return_seat2",
    "return_var_seat1",
    "return_var_seat2",
];
pub const POSITIONS_HEADER: [&str; 7] = ["seed", "population", "opponent", "seat", "row", "col", "visits"];

const INTRA_EVAL_STREAM: u64 = 100;
const CROSS_EVAL_STREAM: u64 = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagHuntExpConfig {
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverId>,
    pub psro_iterations: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub tremble: f64,
    pub temperature: f64,
    pub eval_episodes: usize,
    pub test_episodes: usize,
    pub meta_iters: usize,
    pub meta_conv_tol: f64,
    pub oracle_episodes: usize,
    pub learning_rate: f64,
    pub discount: f64,
    pub batch_size: usize,
    pub step_cap: usize,
    pub observation_encoding: u32,
}

impl Default for StagHuntExpConfig {
    fn default() -> Self {
        let oracle = OracleConfig::default();
        StagHuntExpConfig {
            seeds: (0..5).collect(),
            solvers: vec![
                SolverId::Rae,
                SolverId::Nash,
                SolverId::Uniform,
                SolverId::SelfPlay,
                SolverId::Thpe,
                SolverId::Qre,
            ],
            psro_iterations: 6,
            gamma: 0.15,
            epsilon: 0.001,
            lambda: 0.15,
            tremble: 0.001,
            temperature: 1.0,
            eval_episodes: rae_core::psro::DEFAULT_EVAL_EPISODES,
            test_episodes: 1000,
            meta_iters: 100,
            meta_conv_tol: 1e-3,
            oracle_episodes: oracle.episodes,
            learning_rate: oracle.learning_rate,
            discount: oracle.discount,
            batch_size: oracle.batch_size,
            step_cap: StagHuntConfig::default().step_cap,
            observation_encoding: OBS_ENCODING_VERSION,
        }
    }
}

impl StagHuntExpConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = StagHuntExpConfig {
            seeds: kv.get_seeds("seeds", d.seeds)?,
            solvers: kv.get_list("solvers", d.solvers)?,
            psro_iterations: kv.get("psro_iterations", d.psro_iterations)?,
            gamma: kv.get("gamma", d.gamma)?,
            epsilon: kv.get("epsilon", d.epsilon)?,
            lambda: kv.get("lambda", d.lambda)?,
            tremble: kv.get("tremble", d.tremble)?,
            temperature: kv.get("temperature", d.temperature)?,
            eval_episodes: kv.get("eval_episodes", d.eval_episodes)?,
            test_episodes: kv.get("test_episodes", d.test_episodes)?,
            meta_iters: kv.get("meta_iters", d.meta_iters)?,
            meta_conv_tol: kv.get("meta_conv_tol", d.meta_conv_tol)?,
            oracle_episodes: kv.get("oracle_episodes", d.oracle_episodes)?,
            learning_rate: kv.get("learning_rate", d.learning_rate)?,
            discount: kv.get("discount", d.discount)?,
            batch_size: kv.get("batch_size", d.batch_size)?,
            step_cap: kv.get("step_cap", d.step_cap)?,
            observation_encoding: OBS_ENCODING_VERSION,
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
        self.env_config().validate()?;
        self.psro_config(SolverId::Nash, 0)?.validate()
    }

    pub fn env_config(&self) -> StagHuntConfig {
        StagHuntConfig {
            step_cap: self.step_cap,
            ..StagHuntConfig::default()
        }
    }

    pub fn meta_solver(&self, solver: SolverId) -> Result<MetaSolver> {
        Ok(match solver {
            SolverId::Rae => MetaSolver::Rae(RiskProfile::new(self.gamma, self.epsilon)?),
            SolverId::Nash => MetaSolver::Nash,
            SolverId::Uniform => MetaSolver::Uniform,
            SolverId::SelfPlay => MetaSolver::SelfPlay,
            SolverId::Thpe => MetaSolver::Thpe(self.tremble),
            SolverId::Qre => MetaSolver::Qre(self.temperature),
        })
    }

    pub fn psro_config(&self, solver: SolverId, seed: u64) -> Result<PsroConfig> {
        let oracle = OracleConfig {
            kind: OracleKind::MeanVariancePG,
            lambda: self.lambda,
            learning_rate: self.learning_rate,
            episodes: self.oracle_episodes,
            episode_cap: self.step_cap,
            batch_size: self.batch_size,
            discount: self.discount,
        };
        let mut cfg = PsroConfig::new(self.meta_solver(solver)?, oracle, self.psro_iterations, seed);
        cfg.eval_episodes = self.eval_episodes;
        cfg.meta_iters = self.meta_iters;
        cfg.meta_conv_tol = self.meta_conv_tol;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub seed: u64,
    /// Population in seat one.
    pub population: SolverId,
    /// Population in seat two.
    pub opponent: SolverId,
    pub summary: CrossEvalSummary,
}

impl EvalRecord {
    fn rate(&self, count: u32) -> f64 {
        if self.summary.episodes == 0 {
            0.0
        } else {
            count as f64 / self.summary.episodes as f64
        }
    }

    pub fn plant_rate(&self) -> f64 {
        let p = self.summary.events.plants;
        self.rate(p[0] + p[1])
    }

    pub fn capture_rate(&self) -> f64 {
        self.rate(self.summary.events.captures)
    }

    pub fn gore_rate(&self) -> f64 {
        let g = self.summary.events.gores;
        self.rate(g[0] + g[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub seed: u64,
    pub solver: SolverId,
    pub records: Vec<RunLogRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagHuntResults {
    /// Per seed: intra-population evaluations in solver order, then RAE vs
    /// Nash when both were trained.
    pub evals: Vec<EvalRecord>,
    pub logs: Vec<RunLog>,
}

impl StagHuntResults {
    pub fn intra(&self, seed: u64, solver: SolverId) -> Option<&EvalRecord> {
        self.evals
            .iter()
            .find(|e| e.seed == seed && e.population == solver && e.opponent == solver)
    }

    pub fn cross(&self, seed: u64) -> Option<&EvalRecord> {
        self.evals
            .iter()
            .find(|e| e.seed == seed && e.population == SolverId::Rae && e.opponent == SolverId::Nash)
    }

    pub fn write(&self, cfg: &StagHuntExpConfig, dir: &Path) -> Result<()> {
        output::create_dir(dir)?;
        let mut outputs = vec![
            "stag_hunt_events.csv".to_string(),
            "stag_hunt_positions.csv".to_string(),
        ];
        let mut w = output::csv_file(dir, "stag_hunt_events.csv", &EVENTS_HEADER)?;
        for e in &self.evals {
            let s = &e.summary;
            output::write_row(
                &mut w,
                [
                    e.seed.to_string(),
                    e.population.to_string(),
                    e.opponent.to_string(),
                    s.episodes.to_string(),
                    e.plant_rate().to_string(),
                    e.capture_rate().to_string(),
                    e.gore_rate().to_string(),
                    s.events.plants[0].to_string(),
                    s.events.plants[1].to_string(),
                    s.events.captures.to_string(),
                    s.events.gores[0].to_string(),
                    s.events.gores[1].to_string(),
                    s.mean_return[0].to_string(),
                    s.mean_return[1].to_string(),
                    s.return_variance[0].to_string(),
                    s.return_variance[1].to_string(),
                ],
            )?;
        }
        output::finish_csv(w)?;

        let mut w = output::csv_file(dir, "stag_hunt_positions.csv", &POSITIONS_HEADER)?;
        for e in &self.evals {
            let Some(counts) = &e.summary.position_counts else {
                continue;
            };
            for (seat, cells) in counts.iter().enumerate() {
                for cell in 0..GRID * GRID {
                    output::write_row(
                        &mut w,
                        [
                            e.seed.to_string(),
                            e.population.to_string(),
                            e.opponent.to_string(),
                            (seat + 1).to_string(),
                            (cell / GRID).to_string(),
                            (cell % GRID).to_string(),
                            cells.get(cell).copied().unwrap_or(0).to_string(),
                        ],
                    )?;
                }
            }
        }
        output::finish_csv(w)?;

        let logs = dir.join("logs");
        output::create_dir(&logs)?;
        for log in &self.logs {
            let name = format!("psro_{}_seed{}.jsonl", log.solver, log.seed);
            let mut text = String::new();
            for r in &log.records {
                text.push_str(&serde_json::to_string(r).map_err(std::io::Error::from)?);
                text.push('\n');
            }
            output::write_text(&logs, &name, &text)?;
            outputs.push(format!("logs/{name}"));
        }
        Manifest::new("stag_hunt", cfg, &cfg.seeds, outputs).write(dir)
    }
}

fn run_seed(cfg: &StagHuntExpConfig, seed: u64) -> Result<(Vec<EvalRecord>, Vec<RunLog>)> {
    let env = StagHunt::new(cfg.env_config())?;
    let mut evals = Vec::new();
    let mut logs = Vec::new();
    let mut kept = Vec::new();
    for &solver in &cfg.solvers {
        let outcome = psro_run(&env, &cfg.psro_config(solver, seed)?)?;
        let pop = outcome.populations[0].clone();
        let summary = cross_population_eval(
            &pop,
            &pop,
            &env,
            cfg.test_episodes,
            rng::derive(seed, INTRA_EVAL_STREAM),
        )?;
        evals.push(EvalRecord {
            seed,
            population: solver,
            opponent: solver,
            summary,
        });
        logs.push(RunLog {
            seed,
            solver,
            records: outcome.log,
        });
        if matches!(solver, SolverId::Rae | SolverId::Nash) {
            kept.push((solver, pop));
        }
    }
    let find = |s| kept.iter().find(|(k, _)| *k == s).map(|(_, p)| p);
    if let (Some(rae), Some(nash)) = (find(SolverId::Rae), find(SolverId::Nash)) {
        let summary = cross_population_eval(rae, nash, &env, cfg.test_episodes, rng::derive(seed, CROSS_EVAL_STREAM))?;
        evals.push(EvalRecord {
            seed,
            population: SolverId::Rae,
            opponent: SolverId::Nash,
            summary,
        });
    }
    Ok((evals, logs))
}

pub fn run(cfg: &StagHuntExpConfig) -> Result<StagHuntResults> {
    cfg.validate()?;
    let per_seed = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut results = StagHuntResults {
        evals: Vec::new(),
        logs: Vec::new(),
    };
    for (evals, logs) in per_seed {
        results.evals.extend(evals);
        results.logs.extend(logs);
    }
    Ok(results)
}
