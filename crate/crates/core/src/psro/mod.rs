//! Policy-space response oracles with a risk-averse meta-solver.
//!
//! Each player keeps a growing population of fixed policies. Every iteration
//! the empirical meta-game between populations is extended by Monte Carlo
//! rollouts, a meta-solver turns it into a meta-distribution, and an oracle
//! adds a new policy trained against opponents drawn from that distribution.
//! Symmetric environments share a single population between the seats.

mod eval;
mod oracle;
mod policy;

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, Player};
use crate::risk::RiskProfile;
use crate::rng;
use crate::solvers::{self, IterOptions};

pub use eval::{cross_population_eval, cross_population_eval_with, estimate_meta_entry, CrossEvalSummary, MetaEntry};
pub use oracle::{augmented_reward, exact_nfg_oracle, lift_mixture, mean_variance_pg_oracle, OracleConfig, OracleKind};
pub use policy::{PolicyHandle, PolicyKind, TabularPolicy};

pub const DEFAULT_EVAL_EPISODES: usize = 32;

const ESTIMATE_STREAM: u64 = 1;
const ORACLE_STREAM: u64 = 2;

/// How the meta-game is turned into a meta-distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetaSolver {
    Rae(RiskProfile),
    Nash,
    Uniform,
    /// All mass on the newest policy.
    SelfPlay,
    Thpe(f64),
    Qre(f64),
}

impl MetaSolver {
    pub fn name(&self) -> &'static str {
        match self {
            MetaSolver::Rae(_) => "rae",
            MetaSolver::Nash => "nash",
            MetaSolver::Uniform => "uniform",
            MetaSolver::SelfPlay => "selfplay",
            MetaSolver::Thpe(_) => "thpe",
            MetaSolver::Qre(_) => "qre",
        }
    }
}

/// One player's population and its view of the meta-game.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub policies: Vec<PolicyHandle>,
    /// Estimated mean return of own policy `i` against opponent policy `j`.
    pub meta_payoffs: DMatrix<f64>,
    /// Episodes behind each entry; zero means not yet estimated.
    pub payoff_sample_counts: DMatrix<usize>,
    pub meta_distribution: MixedStrategy,
}

impl Population {
    fn initial<E: Environment>(env: &E, player: Player) -> Self {
        Population {
            policies: vec![PolicyHandle {
                id: 0,
                kind: PolicyKind::Tabular(TabularPolicy::uniform(env.num_observations(), env.num_actions(player))),
            }],
            meta_payoffs: DMatrix::from_element(1, 1, f64::NAN),
            payoff_sample_counts: DMatrix::zeros(1, 1),
            meta_distribution: MixedStrategy::uniform(1),
        }
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    fn push(&mut self, policy: PolicyHandle) {
        self.policies.push(policy);
    }

    /// Grow the matrices to `rows × cols`, marking new entries unestimated.
    fn reshape(&mut self, rows: usize, cols: usize) {
        let m = std::mem::replace(&mut self.meta_payoffs, DMatrix::zeros(0, 0));
        self.meta_payoffs = m.resize(rows, cols, f64::NAN);
        let c = std::mem::replace(&mut self.payoff_sample_counts, DMatrix::zeros(0, 0));
        self.payoff_sample_counts = c.resize(rows, cols, 0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsroConfig {
    pub meta_solver: MetaSolver,
    pub oracle: OracleConfig,
    pub iterations: usize,
    /// Rollouts per meta-game entry.
    pub eval_episodes: usize,
    /// Iteration budget of the meta-solver.
    pub meta_iters: usize,
    pub meta_conv_tol: f64,
    pub seed: u64,
}

impl PsroConfig {
    pub fn new(meta_solver: MetaSolver, oracle: OracleConfig, iterations: usize, seed: u64) -> Self {
        PsroConfig {
            meta_solver,
            oracle,
            iterations,
            eval_episodes: DEFAULT_EVAL_EPISODES,
            meta_iters: 100,
            meta_conv_tol: 1e-3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("PSRO needs at least one iteration".into()));
        }
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be at least 1".into()));
        }
        self.oracle.validate()
    }

    /// Variance aversion handed to the oracle: only the risk-averse
    /// meta-solver is paired with a risk-averse oracle.
    pub fn oracle_lambda(&self) -> f64 {
        match self.meta_solver {
            MetaSolver::Rae(_) => self.oracle.lambda,
            _ => 0.0,
        }
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunLogRecord {
    pub iteration: usize,
    /// Per population (one entry when the population is shared).
    pub meta_distributions: Vec<Vec<f64>>,
    /// Ids of the policies added after this meta-solve (empty on the last line).
    pub new_policy_ids: Vec<usize>,
    pub meta_solver_converged: bool,
    /// SHA-256 over the meta-payoff matrices, row-major little-endian.
    pub meta_game_checksum: String,
}

#[derive(Debug, Clone)]
pub struct PsroOutcome {
    /// Per seat. With a shared population both entries are identical.
    pub populations: [Population; 2],
    pub single_population: bool,
    pub log: Vec<RunLogRecord>,
}

impl PsroOutcome {
    pub fn population(&self, player: Player) -> &Population {
        &self.populations[player.index()]
    }

    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        for record in &self.log {
            serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn meta_game_checksum(populations: &[Population]) -> String {
    let mut hasher = Sha256::new();
    for pop in populations {
        let m = &pop.meta_payoffs;
        hasher.update((m.nrows() as u64).to_le_bytes());
        hasher.update((m.ncols() as u64).to_le_bytes());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                hasher.update(m[(i, j)].to_le_bytes());
            }
        }
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Run PSRO for `cfg.iterations` oracle steps. The populations end with
/// `iterations + 1` policies each and a final meta-distribution over all of
/// them.
pub fn psro_run<E: Environment>(env: &E, cfg: &PsroConfig) -> Result<PsroOutcome> {
    cfg.validate()?;
    let single = env.is_symmetric();
    let mut pops = if single {
        vec![Population::initial(env, Player::One)]
    } else {
        vec![
            Population::initial(env, Player::One),
            Population::initial(env, Player::Two),
        ]
    };
    let estimate_seed = rng::derive(cfg.seed, ESTIMATE_STREAM);
    let oracle_seed = rng::derive(cfg.seed, ORACLE_STREAM);
    let mut log = Vec::with_capacity(cfg.iterations + 1);

    for iteration in 0..=cfg.iterations {
        extend_meta_game(&mut pops, env, cfg.eval_episodes, estimate_seed)?;
        let converged = solve_meta_game(&mut pops, cfg)?;
        let mut record = RunLogRecord {
            iteration,
            meta_distributions: pops.iter().map(|p| p.meta_distribution.probs().to_vec()).collect(),
            new_policy_ids: Vec::new(),
            meta_solver_converged: converged,
            meta_game_checksum: meta_game_checksum(&pops),
        };
        if iteration == cfg.iterations {
            log.push(record);
            break;
        }

        let mut fresh = Vec::with_capacity(pops.len());
        for (p, player) in Player::BOTH.into_iter().enumerate().take(pops.len()) {
            let opponent = if single { &pops[0] } else { &pops[1 - p] };
            let id = pops[p].len();
            let seed = rng::derive(oracle_seed, (iteration * 2 + p) as u64);
            let policy = run_oracle(env, cfg, player, opponent, id, seed).map_err(|e| match e {
                Error::Oracle { message, .. } => Error::Oracle { iteration, message },
                other => other,
            })?;
            fresh.push(policy);
        }
        for (pop, policy) in pops.iter_mut().zip(fresh) {
            record.new_policy_ids.push(policy.id);
            pop.push(policy);
        }
        log.push(record);
    }

    let populations = if single {
        let p = pops.pop().expect("one population");
        [p.clone(), p]
    } else {
        let two = pops.pop().expect("two populations");
        let one = pops.pop().expect("two populations");
        [one, two]
    };
    Ok(PsroOutcome {
        populations,
        single_population: single,
        log,
    })
}

fn run_oracle<E: Environment>(
    env: &E,
    cfg: &PsroConfig,
    player: Player,
    opponent: &Population,
    id: usize,
    seed: u64,
) -> Result<PolicyHandle> {
    let lambda = cfg.oracle_lambda();
    match cfg.oracle.kind {
        OracleKind::ExactNfg => {
            let game = env
                .as_game()
                .ok_or_else(|| Error::Capability("the exact oracle needs a normal-form environment".into()))?;
            let profile = RiskProfile::new(lambda, 0.0)?;
            exact_nfg_oracle(
                &opponent.meta_distribution,
                &opponent.policies,
                game,
                player,
                &profile,
                id,
            )
        }
        OracleKind::MeanVariancePG => {
            let oracle = OracleConfig { lambda, ..cfg.oracle };
            mean_variance_pg_oracle(
                &opponent.policies,
                &opponent.meta_distribution,
                env,
                player,
                &oracle,
                seed,
                id,
            )
        }
    }
}

/// Estimate every meta-game entry not yet backed by rollouts. Entries are
/// seeded by their indices alone, so they never depend on when they were
/// first needed.
fn extend_meta_game<E: Environment>(pops: &mut [Population], env: &E, episodes: usize, seed: u64) -> Result<()> {
    let entry_seed = |i: usize, j: usize| rng::derive(seed, ((i as u64) << 32) | j as u64);
    if pops.len() == 1 {
        let pop = &mut pops[0];
        let n = pop.len();
        pop.reshape(n, n);
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .filter(|&(i, j)| pop.payoff_sample_counts[(i, j)] == 0)
            .collect();
        let entries = pairs
            .par_iter()
            .map(|&(i, j)| estimate_meta_entry(&pop.policies[i], &pop.policies[j], env, episodes, entry_seed(i, j)))
            .collect::<Result<Vec<_>>>()?;
        for ((i, j), entry) in pairs.into_iter().zip(entries) {
            if i == j {
                pop.meta_payoffs[(i, i)] = 0.5 * (entry.mean[0] + entry.mean[1]);
                pop.payoff_sample_counts[(i, i)] = 2 * episodes;
            } else {
                pop.meta_payoffs[(i, j)] = entry.mean[0];
                pop.meta_payoffs[(j, i)] = entry.mean[1];
                pop.payoff_sample_counts[(i, j)] = episodes;
                pop.payoff_sample_counts[(j, i)] = episodes;
            }
        }
    } else {
        let (n1, n2) = (pops[0].len(), pops[1].len());
        pops[0].reshape(n1, n2);
        pops[1].reshape(n2, n1);
        let pairs: Vec<(usize, usize)> = (0..n1)
            .flat_map(|i| (0..n2).map(move |j| (i, j)))
            .filter(|&(i, j)| pops[0].payoff_sample_counts[(i, j)] == 0)
            .collect();
        let (one, two) = (&pops[0], &pops[1]);
        let entries = pairs
            .par_iter()
            .map(|&(i, j)| estimate_meta_entry(&one.policies[i], &two.policies[j], env, episodes, entry_seed(i, j)))
            .collect::<Result<Vec<_>>>()?;
        for ((i, j), entry) in pairs.into_iter().zip(entries) {
            pops[0].meta_payoffs[(i, j)] = entry.mean[0];
            pops[1].meta_payoffs[(j, i)] = entry.mean[1];
            pops[0].payoff_sample_counts[(i, j)] = episodes;
            pops[1].payoff_sample_counts[(j, i)] = episodes;
        }
    }
    Ok(())
}

/// Set each population's meta-distribution; returns whether the iterative
/// meta-solver converged (always true for closed-form ones).
fn solve_meta_game(pops: &mut [Population], cfg: &PsroConfig) -> Result<bool> {
    let game = if pops.len() == 1 {
        Game::symmetric(pops[0].meta_payoffs.clone())?
    } else {
        Game::asymmetric(pops[0].meta_payoffs.clone(), pops[1].meta_payoffs.clone())?
    };
    let opts = IterOptions::new(cfg.meta_iters, cfg.meta_conv_tol);
    let (strategies, converged) = match cfg.meta_solver {
        MetaSolver::Rae(profile) => {
            let (eq, _) = solvers::sfp_rae_with(&game, &profile, &opts)?;
            (eq.strategies, eq.converged)
        }
        MetaSolver::Nash => {
            let (eq, _) = solvers::fp_nash(&game, &opts)?;
            (eq.strategies, eq.converged)
        }
        MetaSolver::Thpe(tremble) => {
            let (eq, _) = solvers::fp_thpe(&game, tremble, &opts)?;
            (eq.strategies, eq.converged)
        }
        MetaSolver::Qre(temperature) => {
            let (eq, _) = solvers::fp_qre(&game, temperature, &opts)?;
            (eq.strategies, eq.converged)
        }
        MetaSolver::Uniform => (solvers::uniform_profile(&game).strategies, true),
        MetaSolver::SelfPlay => {
            let newest = |n: usize| MixedStrategy::pure(n, n - 1);
            (
                [
                    newest(game.num_actions(Player::One)),
                    newest(game.num_actions(Player::Two)),
                ],
                true,
            )
        }
    };
    for (pop, s) in pops.iter_mut().zip(strategies) {
        pop.meta_distribution = s;
    }
    Ok(converged)
}
