//! Convergence curves of risk-averse fictitious play on three game classes.
//!
//! Config keys: `num_actions` (100), `seeds` (0..20), `gammas`
//! (0.05,0.1,0.5,1,5), `epsilon` (0.001), `iterations` (100), `conv_tol`
//! (0.001), `classes` (coordination,anti_coordination,random),
//! `random_lo` (-10), `random_hi` (15).
//!
//! Runs always last `iterations` iterations so every curve has the same
//! length. The distance at iteration `t` is the larger of the two players'
//! distances between consecutive observed strategies.

use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{median, SolveSettings};
use crate::config::KvConfig;
use crate::manifest::Manifest;
use crate::output;
use rae_core::game::{anti_coordination, generate_coordination_game, random_game, GameGenConfig, Interval};
use rae_core::solvers::sfp_rae_with;
use rae_core::{Error, Game, Result};

pub const HEADER: [&str; 5] = ["class", "seed", "gamma", "iteration", "distance"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GameClass {
    Coordination,
    AntiCoordination,
    Random,
}

impl GameClass {
    pub const ALL: [GameClass; 3] = [GameClass::Coordination, GameClass::AntiCoordination, GameClass::Random];

    pub fn name(self) -> &'static str {
        match self {
            GameClass::Coordination => "coordination",
            GameClass::AntiCoordination => "anti_coordination",
            GameClass::Random => "random",
        }
    }
}

impl FromStr for GameClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GameClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown game class '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfpRobustnessConfig {
    pub num_actions: usize,
    pub seeds: Vec<u64>,
    pub gammas: Vec<f64>,
    pub epsilon: f64,
    pub iterations: usize,
    pub conv_tol: f64,
    pub classes: Vec<GameClass>,
    pub random_range: Interval,
}

impl Default for SfpRobustnessConfig {
    fn default() -> Self {
        SfpRobustnessConfig {
            num_actions: 100,
            seeds: (0..20).collect(),
            gammas: vec![0.05, 0.1, 0.5, 1.0, 5.0],
            epsilon: 0.001,
            iterations: 100,
            conv_tol: 1e-3,
            classes: GameClass::ALL.to_vec(),
            random_range: Interval::new(-10.0, 15.0),
        }
    }
}

impl SfpRobustnessConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = SfpRobustnessConfig {
            num_actions: kv.get("num_actions", d.num_actions)?,
            seeds: kv.get_seeds("seeds", d.seeds)?,
            gammas: kv.get_list("gammas", d.gammas)?,
            epsilon: kv.get("epsilon", d.epsilon)?,
            iterations: kv.get("iterations", d.iterations)?,
            conv_tol: kv.get("conv_tol", d.conv_tol)?,
            classes: kv.get_list("classes", d.classes)?,
            random_range: Interval::new(
                kv.get("random_lo", d.random_range.lo)?,
                kv.get("random_hi", d.random_range.hi)?,
            ),
        };
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.gammas.is_empty() || self.classes.is_empty() {
            return Err(Error::Config("seeds, gammas and classes must be non-empty".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn game(&self, class: GameClass, seed: u64) -> Result<Game> {
        let coordination = || generate_coordination_game(&GameGenConfig::new(self.num_actions, seed));
        match class {
            GameClass::Coordination => coordination(),
            GameClass::AntiCoordination => anti_coordination(&coordination()?),
            GameClass::Random => random_game(self.num_actions, seed, self.random_range),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub class: GameClass,
    pub seed: u64,
    pub gamma: f64,
    pub distances: Vec<f64>,
}

impl Curve {
    pub fn final_distance(&self) -> f64 {
        *self.distances.last().expect("non-empty curve")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfpRobustnessResults {
    pub curves: Vec<Curve>,
}

impl SfpRobustnessResults {
    /// Median final distance over every run of `class`, optionally at one γ.
    pub fn median_final(&self, class: GameClass, gamma: Option<f64>) -> f64 {
        let mut finals: Vec<f64> = self
            .curves
            .iter()
            .filter(|c| c.class == class && gamma.is_none_or(|g| c.gamma == g))
            .map(Curve::final_distance)
            .collect();
        median(&mut finals)
    }

    pub fn write(&self, cfg: &SfpRobustnessConfig, dir: &Path) -> Result<()> {
        output::create_dir(dir)?;
        let mut w = output::csv_file(dir, "sfp_robustness.csv", &HEADER)?;
        for c in &self.curves {
            for (t, d) in c.distances.iter().enumerate() {
                output::write_row(
                    &mut w,
                    [
                        c.class.name().to_string(),
                        c.seed.to_string(),
                        c.gamma.to_string(),
                        (t + 1).to_string(),
                        d.to_string(),
                    ],
                )?;
            }
        }
        output::finish_csv(w)?;
        Manifest::new("sfp_robustness", cfg, &cfg.seeds, vec!["sfp_robustness.csv".into()]).write(dir)
    }
}

pub fn run(cfg: &SfpRobustnessConfig) -> Result<SfpRobustnessResults> {
    cfg.validate()?;
    let jobs: Vec<(GameClass, u64, f64)> = cfg
        .classes
        .iter()
        .flat_map(|&class| {
            cfg.seeds
                .iter()
                .flat_map(move |&seed| cfg.gammas.iter().map(move |&gamma| (class, seed, gamma)))
        })
        .collect();
    let curves = jobs
        .par_iter()
        .map(|&(class, seed, gamma)| {
            let game = cfg.game(class, seed)?;
            let s = SolveSettings {
                gamma,
                epsilon: cfg.epsilon,
                iterations: cfg.iterations,
                conv_tol: cfg.conv_tol,
                ..SolveSettings::default()
            };
            let mut opts = s.options();
            opts.early_stop = false;
            let (_, trace) = sfp_rae_with(&game, &s.profile()?, &opts)?;
            Ok(Curve {
                class,
                seed,
                gamma,
                distances: trace.distances.iter().map(|d| d[0].max(d[1])).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SfpRobustnessResults { curves })
}
