use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rae_cli::experiments::{self, frontier, psro_nfg, qre_failure, sfp_robustness, stag_hunt, SolveSettings};
use rae_cli::KvConfig;
use rae_core::game::{
    anti_coordination, generate_coordination_game, load_game, make_risk_dilemma, random_game, save_game, GameGenConfig,
    Interval,
};
use rae_core::solvers::{exploitability, SolverId};
use rae_core::Player;

#[derive(Parser)]
#[command(
    name = "rae",
    version,
    about = "Risk-averse equilibria: solvers, PSRO and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game and write it as JSON.
    GenGame(GenGameArgs),
    /// Solve a game from a JSON file and print the profile as JSON.
    Solve(SolveArgs),
    /// RAE γ sweep against the baselines on coordination games.
    Frontier(ExpArgs),
    /// PSRO populations on the grid-world stag hunt.
    StagHunt(ExpArgs),
    /// Convergence curves of risk-averse fictitious play.
    SfpRobustness(ExpArgs),
    /// Logit-QRE temperature sweep on the two-action risk dilemma.
    QreFailure(ExpArgs),
    /// PSRO with the exact oracle on normal-form games.
    Psro(ExpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GameKind {
    Coordination,
    AntiCoordination,
    Random,
    RiskDilemma,
}

#[derive(Args)]
struct GenGameArgs {
    #[arg(long, value_enum, default_value = "coordination")]
    kind: GameKind,
    #[arg(long, default_value_t = 10)]
    actions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Payoff range of random games.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, default_value = "rae")]
    solver: SolverId,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = rae_core::risk::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.001)]
    tremble: f64,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 1e-3)]
    conv_tol: f64,
    /// Also write the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ExpArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Run a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Single γ (replaces γ grids).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Solver iterations (PSRO iterations for the stag hunt).
    #[arg(long)]
    iterations: Option<usize>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

struct Keys {
    seed: &'static str,
    gamma: &'static str,
    iterations: &'static str,
}

impl ExpArgs {
    fn load(&self, keys: Keys) -> anyhow::Result<KvConfig> {
        let mut kv = match &self.config {
            Some(p) => KvConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => KvConfig::default(),
        };
        if let Some(s) = self.seed {
            kv.set(keys.seed, s.to_string());
        }
        if let Some(g) = self.gamma {
            kv.set(keys.gamma, g.to_string());
        }
        if let Some(e) = self.epsilon {
            kv.set("epsilon", e.to_string());
        }
        if let Some(i) = self.iterations {
            kv.set(keys.iterations, i.to_string());
        }
        for pair in &self.set {
            let Some((k, v)) = pair.split_once('=') else {
                bail!("--set expects KEY=VALUE, got `{pair}`");
            };
            kv.set(k.trim(), v.trim());
        }
        Ok(kv)
    }

    fn out_dir(&self, default: &str) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| Path::new("results").join(default))
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    solver: SolverId,
    converged: bool,
    final_distance: f64,
    eu: [f64; 2],
    uvar: [f64; 2],
    exploitability: f64,
    strategies: [&'a [f64]; 2],
}

fn gen_game(a: &GenGameArgs) -> anyhow::Result<()> {
    let game = match a.kind {
        GameKind::Coordination => generate_coordination_game(&GameGenConfig::new(a.actions, a.seed))?,
        GameKind::AntiCoordination => {
            anti_coordination(&generate_coordination_game(&GameGenConfig::new(a.actions, a.seed))?)?
        }
        GameKind::Random => random_game(a.actions, a.seed, Interval::new(a.lo, a.hi))?,
        GameKind::RiskDilemma => make_risk_dilemma(5.0, 20.0, -100.0)?,
    };
    save_game(&game, &a.out)?;
    Ok(())
}

fn solve(a: &SolveArgs) -> anyhow::Result<()> {
    let game = load_game(&a.game).with_context(|| format!("loading {}", a.game.display()))?;
    let s = SolveSettings {
        gamma: a.gamma,
        epsilon: a.epsilon,
        tremble: a.tremble,
        temperature: a.temperature,
        iterations: a.iterations,
        conv_tol: a.conv_tol,
    };
    let (eq, trace) = experiments::solve(&game, a.solver, &s)?;
    let (e1, v1) = eq.mean_variance(&game, Player::One)?;
    let (e2, v2) = eq.mean_variance(&game, Player::Two)?;
    let report = SolveReport {
        solver: eq.solver,
        converged: eq.converged,
        final_distance: eq.final_distance,
        eu: [e1, e2],
        uvar: [v1, v2],
        exploitability: exploitability(&game, &eq.strategies)?,
        strategies: [eq.strategies[0].probs(), eq.strategies[1].probs()],
    };
    if let Some(path) = &a.trace {
        match trace {
            Some(t) => t.write_csv(&game, BufWriter::new(File::create(path)?))?,
            None => bail!("solver {} has no trace", a.solver),
        }
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenGame(a) => gen_game(&a),
        Command::Solve(a) => solve(&a),
        Command::Frontier(a) => {
            let cfg = frontier::FrontierConfig::from_kv(&a.load(Keys {
                seed: "seeds",
                gamma: "gammas",
                iterations: "iterations",
            })?)?;
            let dir = a.out_dir("frontier");
            let res = frontier::run(&cfg)?;
            res.write(&cfg, &dir)?;
            for solver in frontier::BASELINES {
                eprintln!(
                    "RAE dominates {solver} on {}/{} seeds",
                    res.dominated_seeds(solver, cfg.eu_slack),
                    cfg.seeds.len()
                );
            }
            eprintln!("wrote {}", dir.display());
            Ok(())
        }
        Command::StagHunt(a) => {
            let cfg = stag_hunt::StagHuntExpConfig::from_kv(&a.load(Keys {
                seed: "seeds",
                gamma: "gamma",
                iterations: "psro_iterations",
            })?)?;
            let dir = a.out_dir("stag_hunt");
            let res = stag_hunt::run(&cfg)?;
            res.write(&cfg, &dir)?;
            for e in &res.evals {
                eprintln!(
                    "seed {} {} vs {}: plants {:.3} captures {:.3} gores {:.3}",
                    e.seed,
                    e.population,
                    e.opponent,
                    e.plant_rate(),
                    e.capture_rate(),
                    e.gore_rate()
                );
            }
            eprintln!("wrote {}", dir.display());
            Ok(())
        }
        Command::SfpRobustness(a) => {
            let cfg = sfp_robustness::SfpRobustnessConfig::from_kv(&a.load(Keys {
                seed: "seeds",
                gamma: "gammas",
                iterations: "iterations",
            })?)?;
            let dir = a.out_dir("sfp_robustness");
            let res = sfp_robustness::run(&cfg)?;
            res.write(&cfg, &dir)?;
            for &class in &cfg.classes {
                eprintln!(
                    "{}: median final distance {:e}",
                    class.name(),
                    res.median_final(class, None)
                );
            }
            eprintln!("wrote {}", dir.display());
            Ok(())
        }
        Command::QreFailure(a) => {
            let cfg = qre_failure::QreFailureConfig::from_kv(&a.load(Keys {
                seed: "seed",
                gamma: "gammas",
                iterations: "iterations",
            })?)?;
            let dir = a.out_dir("qre_failure");
            qre_failure::run(&cfg)?.write(&cfg, &dir)?;
            eprintln!("wrote {}", dir.display());
            Ok(())
        }
        Command::Psro(a) => {
            let cfg = psro_nfg::PsroNfgConfig::from_kv(&a.load(Keys {
                seed: "seeds",
                gamma: "gamma",
                iterations: "iterations",
            })?)?;
            let dir = a.out_dir("psro");
            psro_nfg::run(&cfg)?.write(&cfg, &dir)?;
            eprintln!("wrote {}", dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = err
                .downcast_ref::<rae_core::Error>()
                .map_or("cli", rae_core::Error::kind);
            let msg = serde_json::json!({ "error": kind, "message": format!("{err:#}") });
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
