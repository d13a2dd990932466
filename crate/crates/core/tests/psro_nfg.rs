use rae_core::envs::NfgEnv;
use rae_core::game::make_risk_dilemma;
use rae_core::psro::{psro_run, MetaSolver, OracleConfig, PolicyHandle, PsroConfig};
use rae_core::{Game, PayoffMatrix, RiskProfile};

fn dilemma_env() -> NfgEnv {
    NfgEnv::new(make_risk_dilemma(5.0, 20.0, -100.0).unwrap())
}

#[test]
fn log_has_one_line_per_meta_solve() {
    let cfg = PsroConfig::new(MetaSolver::Nash, OracleConfig::exact(0.0), 3, 9);
    let out = psro_run(&dilemma_env(), &cfg).unwrap();
    assert_eq!(out.log.len(), 4);
    for (i, rec) in out.log.iter().enumerate() {
        assert_eq!(rec.iteration, i);
        assert_eq!(rec.meta_distributions[0].len(), i + 1);
        assert_eq!(rec.meta_game_checksum.len(), 64);
    }
    assert!(out.log.last().unwrap().new_policy_ids.is_empty());
    let mut buf = Vec::new();
    out.write_log(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 4);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["meta_distributions"].is_array());
    }
}

#[test]
fn asymmetric_games_keep_two_populations() {
    let p1 = PayoffMatrix::from_row_slice(2, 3, &[3.0, 0.0, 1.0, 0.0, 2.0, 1.0]);
    let p2 = PayoffMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 3.0, 1.0, 1.0]);
    let env = NfgEnv::new(Game::asymmetric(p1, p2).unwrap());
    let cfg = PsroConfig::new(
        MetaSolver::Rae(RiskProfile::new(1.0, 0.001).unwrap()),
        OracleConfig::exact(0.0),
        2,
        4,
    );
    let out = psro_run(&env, &cfg).unwrap();
    assert!(!out.single_population);
    for pop in &out.populations {
        assert_eq!(pop.len(), 3);
        assert!(pop.meta_payoffs.iter().all(|v| v.is_finite()));
        for p in &pop.policies {
            let back = PolicyHandle::from_json(&p.to_json()).unwrap();
            assert_eq!(&back, p);
        }
    }
    assert_eq!(out.log.last().unwrap().meta_distributions.len(), 2);
}
