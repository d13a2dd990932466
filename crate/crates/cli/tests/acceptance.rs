//! Exit criteria, run end to end at full size.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero if any
//! failed. Runs sequentially; the stag hunt dominates the wall time.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rae_cli::experiments::frontier::{self, FrontierConfig, BASELINES};
use rae_cli::experiments::psro_nfg::{self, PsroNfgConfig};
use rae_cli::experiments::qre_failure::{self, QreFailureConfig};
use rae_cli::experiments::sfp_robustness::{self, GameClass, SfpRobustnessConfig};
use rae_cli::experiments::stag_hunt::{self, StagHuntExpConfig};
use rae_core::game::{generate_coordination_game, GameGenConfig};
use rae_core::qp::{brute_force_best_response, check_min_variance, risk_averse_best_response, DEFAULT_TOL};
use rae_core::risk::{mean_variance, total_utility, weighted_covariance};
use rae_core::rng::{self, ChaCha8Rng as ChaChaRng};
use rae_core::solvers::{best_response_gaps, sfp_rae, SolverId};
use rae_core::{Game, MixedStrategy, PayoffMatrix, Player, RiskProfile};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn random_matrix(rng: &mut ChaChaRng, rows: usize, cols: usize, lo: f64, hi: f64) -> PayoffMatrix {
    PayoffMatrix::from_fn(rows, cols, |_, _| rng::uniform(rng, lo, hi))
}

fn random_strategy(rng: &mut ChaChaRng, n: usize) -> MixedStrategy {
    let w: Vec<f64> = (0..n).map(|_| rng::unit(rng) + 1e-3).collect();
    let s: f64 = w.iter().sum();
    MixedStrategy::new(w.iter().map(|x| x / s).collect()).unwrap()
}

fn qp_oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = rng::seeded(0xA11CE);
    let mut worst = 0.0_f64;
    let mut qp_below_grid = 0.0_f64;
    let mut checks = 0;
    for _ in 0..200 {
        let n = 2 + rng::index(&mut rng, 2);
        let m = random_matrix(&mut rng, n, n, -10.0, 15.0);
        let opp = random_strategy(&mut rng, n);
        for gamma in [0.0, 0.5, 2.0] {
            for epsilon in [0.0, 0.001] {
                let p = RiskProfile::new(gamma, epsilon).unwrap();
                let qp = risk_averse_best_response(&opp, &m, &p, DEFAULT_TOL).unwrap();
                let grid = brute_force_best_response(&opp, &m, &p, 1e-3).unwrap();
                let a = total_utility(&qp.strategy, &opp, &m, &p).unwrap();
                let b = total_utility(&grid, &opp, &m, &p).unwrap();
                worst = worst.max((a - b).abs());
                qp_below_grid = qp_below_grid.max(b - a);
                checks += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-4 && elapsed < Duration::from_secs(120),
        format!(
            "{checks} comparisons, max |objective gap| {worst:.3e}, max grid excess over QP {qp_below_grid:.1e}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn min_variance_suite() -> Verdict {
    let mut rng = rng::seeded(0xB0B);
    let mut failures = 0;
    for i in 0..100 {
        let m = random_matrix(&mut rng, 3, 3, -10.0, 15.0);
        let opp = random_strategy(&mut rng, 3);
        let gamma = rng::uniform(&mut rng, 0.1, 5.0);
        let epsilon = if i % 2 == 0 { 0.0 } else { 0.001 };
        let p = RiskProfile::new(gamma, epsilon).unwrap();
        let r = risk_averse_best_response(&opp, &m, &p, DEFAULT_TOL).unwrap();
        if !check_min_variance(&opp, &m, &p, &r, 1e-3).unwrap() {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!("{failures}/100 instances dominated by a grid point"),
    )
}

fn risk_invariants() -> Verdict {
    const TOL: f64 = 1e-8;
    let mut rng = rng::seeded(0xC0FFEE);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut note = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    for _ in 0..1000 {
        let n = 2 + rng::index(&mut rng, 5);
        let k = 2 + rng::index(&mut rng, 5);
        let m = random_matrix(&mut rng, n, k, -10.0, 15.0);
        let opp = random_strategy(&mut rng, k);
        let own = random_strategy(&mut rng, n);

        let cov = weighted_covariance(&opp, &m).unwrap();
        let c = cov.matrix();
        note("symmetry", (c - c.transpose()).amax());
        let min_eig = c.clone().symmetric_eigen().eigenvalues.min();
        note("psd", (-min_eig).max(0.0));

        let pure = MixedStrategy::pure(k, rng::index(&mut rng, k));
        let (_, v) = mean_variance(&own, &pure, &m).unwrap();
        note("pure_opponent", v.abs());

        let (eu, var) = mean_variance(&own, &opp, &m).unwrap();
        let shift = rng::uniform(&mut rng, -20.0, 20.0);
        let (eu_s, var_s) = mean_variance(&own, &opp, &m.add_scalar(shift)).unwrap();
        note("shift", (eu_s - eu - shift).abs().max((var_s - var).abs()));
        let scale = rng::uniform(&mut rng, 0.1, 3.0);
        let (eu_a, var_a) = mean_variance(&own, &opp, &(&m * scale)).unwrap();
        note(
            "scale",
            (eu_a - scale * eu).abs().max((var_a - scale * scale * var).abs()),
        );

        let sq = random_matrix(&mut rng, n, n, -10.0, 15.0);
        let sym = Game::symmetric(sq.clone()).unwrap();
        let asym = Game::asymmetric(sq.clone(), sq).unwrap();
        let x = random_strategy(&mut rng, n);
        let y = random_strategy(&mut rng, n);
        for player in Player::BOTH {
            let a = rae_core::risk::player_mean_variance(&sym, player, &x, &y).unwrap();
            let b = rae_core::risk::player_mean_variance(&asym, player, &x, &y).unwrap();
            note("sym_asym", (a.0 - b.0).abs().max((a.1 - b.1).abs()));
        }
    }
    let pass = worst.values().all(|v| *v <= TOL);
    let detail = worst
        .iter()
        .map(|(k, v)| format!("{k} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(pass, format!("1000 draws, worst: {detail}"))
}

fn fixed_point_check() -> Verdict {
    let gammas = [0.1, 0.5, 1.0, 2.0, 5.0];
    let mut converged = 0;
    let mut worst = 0.0_f64;
    for seed in 0..50u64 {
        let n = 5 + (seed as usize % 11);
        let game = generate_coordination_game(&GameGenConfig::new(n, seed)).unwrap();
        let p = RiskProfile::new(gammas[seed as usize % gammas.len()], 0.001).unwrap();
        let (eq, _) = sfp_rae(&game, &p, 100, 1e-3).unwrap();
        if eq.converged {
            converged += 1;
            let gaps = best_response_gaps(&game, &eq.strategies, &p).unwrap();
            worst = worst.max(gaps[0]).max(gaps[1]);
        }
    }
    verdict(
        converged > 0 && worst <= 1e-6,
        format!("{converged}/50 converged, max best-response gap {worst:.2e}"),
    )
}

fn frontier_dominance() -> Verdict {
    let start = Instant::now();
    let cfg = FrontierConfig::default();
    let res = frontier::run(&cfg).unwrap();
    let elapsed = start.elapsed();
    let needed = (0.9 * cfg.seeds.len() as f64).ceil() as usize;
    let mut pass = true;
    let mut parts = Vec::new();
    for solver in BASELINES {
        let k = res.dominated_seeds(solver, cfg.eu_slack);
        pass &= k >= needed;
        parts.push(format!("{solver} {k}/{}", cfg.seeds.len()));
    }
    let monotone = res.monotone_seeds();
    pass &= monotone == cfg.seeds.len();
    pass &= elapsed < Duration::from_secs(600);
    verdict(
        pass,
        format!(
            "dominated seeds (need {needed}): {}; monotone {monotone}/{}; {:.0}s",
            parts.join(", "),
            cfg.seeds.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn sfp_robustness_check() -> Verdict {
    let cfg = SfpRobustnessConfig::default();
    let res = sfp_robustness::run(&cfg).unwrap();
    let median = res.median_final(GameClass::Coordination, None);
    let per_gamma: Vec<String> = cfg
        .gammas
        .iter()
        .map(|&g| format!("{g}:{:.1e}", res.median_final(GameClass::Coordination, Some(g))))
        .collect();
    let others_ok = [GameClass::AntiCoordination, GameClass::Random].iter().all(|&class| {
        let curves: Vec<_> = res.curves.iter().filter(|c| c.class == class).collect();
        curves.len() == cfg.seeds.len() * cfg.gammas.len()
            && curves
                .iter()
                .all(|c| c.distances.len() == cfg.iterations && c.distances.iter().all(|d| d.is_finite()))
    });
    verdict(
        median < 1e-3 && others_ok,
        format!(
            "coordination median final distance {median:.2e} (per gamma {}); other classes emitted: {others_ok}",
            per_gamma.join(" ")
        ),
    )
}

fn stag_hunt_replication() -> Verdict {
    let start = Instant::now();
    let cfg = StagHuntExpConfig {
        solvers: vec![SolverId::Rae, SolverId::Nash],
        ..StagHuntExpConfig::default()
    };
    let res = stag_hunt::run(&cfg).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(30 * 60);
    let mut lines = Vec::new();
    for &seed in &cfg.seeds {
        let rae = res.intra(seed, SolverId::Rae).unwrap();
        let nash = res.intra(seed, SolverId::Nash).unwrap();
        let cross = res.cross(seed).unwrap();
        let g = cross.summary.events.gores;
        let ok = [
            rae.gore_rate() < 0.1,
            rae.plant_rate() > rae.capture_rate(),
            nash.capture_rate() > nash.plant_rate(),
            g[1] > g[0],
        ];
        pass &= ok.iter().all(|b| *b);
        lines.push(format!(
            "seed {seed}: rae gore {:.3} plant {:.2} capture {:.2} | nash plant {:.2} capture {:.2} | cross gores rae {} nash {} {}",
            rae.gore_rate(),
            rae.plant_rate(),
            rae.capture_rate(),
            nash.plant_rate(),
            nash.capture_rate(),
            g[0],
            g[1],
            ok.map(|b| if b { 'y' } else { 'n' }).iter().collect::<String>()
        ));
    }
    verdict(
        pass,
        format!("{:.0}s\n    {}", elapsed.as_secs_f64(), lines.join("\n    ")),
    )
}

fn qre_failure_case() -> Verdict {
    let res = qre_failure::run(&QreFailureConfig::default()).unwrap();
    let rae = res.rae_at(1.0).unwrap().uvar;
    let min_qre = res.qre().map(|r| r.uvar).fold(f64::INFINITY, f64::min);
    let pass = res.qre().all(|r| r.uvar > rae);
    verdict(pass, format!("min QRE UVar {min_qre:.4} vs RAE(gamma=1) UVar {rae:.4}"))
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Verdict {
    type Runner = Box<dyn Fn(&Path)>;
    let experiments: Vec<(&str, Runner)> = vec![
        (
            "frontier",
            Box::new(|d| {
                let cfg = FrontierConfig {
                    num_actions: 20,
                    seeds: (0..3).collect(),
                    ..FrontierConfig::default()
                };
                frontier::run(&cfg).unwrap().write(&cfg, d).unwrap();
            }),
        ),
        (
            "sfp_robustness",
            Box::new(|d| {
                let cfg = SfpRobustnessConfig {
                    num_actions: 20,
                    seeds: (0..2).collect(),
                    ..SfpRobustnessConfig::default()
                };
                sfp_robustness::run(&cfg).unwrap().write(&cfg, d).unwrap();
            }),
        ),
        (
            "qre_failure",
            Box::new(|d| {
                let cfg = QreFailureConfig::default();
                qre_failure::run(&cfg).unwrap().write(&cfg, d).unwrap();
            }),
        ),
        (
            "psro",
            Box::new(|d| {
                let cfg = PsroNfgConfig {
                    num_actions: 20,
                    seeds: vec![0],
                    iterations: 5,
                    ..PsroNfgConfig::default()
                };
                psro_nfg::run(&cfg).unwrap().write(&cfg, d).unwrap();
            }),
        ),
        (
            "stag_hunt",
            Box::new(|d| {
                let cfg = StagHuntExpConfig {
                    seeds: vec![0, 1],
                    psro_iterations: 2,
                    oracle_episodes: 2000,
                    test_episodes: 50,
                    ..StagHuntExpConfig::default()
                };
                stag_hunt::run(&cfg).unwrap().write(&cfg, d).unwrap();
            }),
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, run) in &experiments {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(a.path());
        run(b.path());
        let (fa, fb) = (files(a.path()), files(b.path()));
        let same = !fa.is_empty() && fa == fb;
        pass &= same;
        parts.push(format!(
            "{name} {} files {}",
            fa.len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    verdict(pass, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("qp_oracle_equivalence", qp_oracle_equivalence),
        ("min_variance_suite", min_variance_suite),
        ("risk_measure_invariants", risk_invariants),
        ("sfp_fixed_point", fixed_point_check),
        ("frontier_dominance", frontier_dominance),
        ("sfp_robustness", sfp_robustness_check),
        ("stag_hunt_replication", stag_hunt_replication),
        ("qre_failure_case", qre_failure_case),
        ("determinism", determinism),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let v = check();
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("acceptance: {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
