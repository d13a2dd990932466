//! Two-player normal-form games, mixed strategies, the coordination-game
//! generator and the JSON game format.

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Rows index the owner's actions, columns the opponent's.
pub type PayoffMatrix = DMatrix<f64>;

/// Absolute tolerance on `sum(probs) == 1`.
pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// A probability vector over a player's actions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Validation("mixed strategy must be non-empty".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::Validation(format!(
                "probability {i} is {p}, expected a finite non-negative value"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Validation(format!("probabilities sum to {sum}, expected 1")));
        }
        Ok(MixedStrategy(probs))
    }

    /// Skips validation; callers guarantee the simplex invariants.
    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        MixedStrategy(probs)
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform strategy over zero actions");
        MixedStrategy(vec![1.0 / n as f64; n])
    }

    pub fn pure(n: usize, action: usize) -> Self {
        assert!(action < n, "action {action} out of range for {n} actions");
        let mut probs = vec![0.0; n];
        probs[action] = 1.0;
        MixedStrategy(probs)
    }

    /// `floor` on every action, the residual `1 - (n-1)*floor` on `action`.
    pub fn floored_pure(n: usize, action: usize, floor: f64) -> Result<Self> {
        check_floor(n, floor)?;
        if action >= n {
            return Err(Error::Validation(format!(
                "action {action} out of range for {n} actions"
            )));
        }
        let mut probs = vec![floor; n];
        probs[action] = 1.0 - (n - 1) as f64 * floor;
        Ok(MixedStrategy(probs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn is_floored(&self, floor: f64) -> bool {
        self.0.iter().all(|&p| p >= floor)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.0.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
    }

    pub fn distance(&self, other: &MixedStrategy) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Lowest index carrying the largest probability.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

impl AsRef<[f64]> for MixedStrategy {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Lowest index of the maximum entry.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_floor(n: usize, floor: f64) -> Result<()> {
    if !(floor.is_finite() && floor >= 0.0) {
        return Err(Error::Config(format!("floor {floor} must be finite and >= 0")));
    }
    if floor * n as f64 >= 1.0 && n > 1 {
        return Err(Error::Config(format!(
            "floor {floor} infeasible for {n} actions (needs floor * n < 1)"
        )));
    }
    if n == 1 && floor >= 1.0 {
        return Err(Error::Config(format!("floor {floor} infeasible for 1 action")));
    }
    Ok(())
}

/// A finite two-player normal-form game.
///
/// `payoff(Player::One)` is `|A1| x |A2|`, `payoff(Player::Two)` is
/// `|A2| x |A1|`; both are indexed `[own action, opponent action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    payoffs: [PayoffMatrix; 2],
    symmetric: bool,
}

impl Game {
    /// Both players share the action set and the utility matrix.
    pub fn symmetric(payoff: PayoffMatrix) -> Result<Self> {
        if payoff.nrows() != payoff.ncols() {
            return Err(Error::Validation(format!(
                "symmetric game needs a square matrix, got {}x{}",
                payoff.nrows(),
                payoff.ncols()
            )));
        }
        check_matrix("payoff_p1", &payoff)?;
        Ok(Game {
            payoffs: [payoff.clone(), payoff],
            symmetric: true,
        })
    }

    pub fn asymmetric(payoff_p1: PayoffMatrix, payoff_p2: PayoffMatrix) -> Result<Self> {
        check_matrix("payoff_p1", &payoff_p1)?;
        check_matrix("payoff_p2", &payoff_p2)?;
        if payoff_p2.nrows() != payoff_p1.ncols() || payoff_p2.ncols() != payoff_p1.nrows() {
            return Err(Error::Validation(format!(
                "payoff_p2 is {}x{}, expected {}x{}",
                payoff_p2.nrows(),
                payoff_p2.ncols(),
                payoff_p1.ncols(),
                payoff_p1.nrows()
            )));
        }
        Ok(Game {
            payoffs: [payoff_p1, payoff_p2],
            symmetric: false,
        })
    }

    /// Build a symmetric game from row vectors.
    pub fn symmetric_from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Game::symmetric(matrix_from_rows("payoff_p1", rows)?)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn num_actions(&self, player: Player) -> usize {
        self.payoffs[player.index()].nrows()
    }

    pub fn payoff(&self, player: Player) -> &PayoffMatrix {
        &self.payoffs[player.index()]
    }

    /// `max - min` over every entry of both matrices.
    pub fn payoff_range(&self) -> f64 {
        let (lo, hi) = self
            .payoffs
            .iter()
            .flat_map(|m| m.iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }
}

fn check_matrix(name: &str, m: &PayoffMatrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Validation(format!("{name} has no actions")));
    }
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if !v.is_finite() {
                return Err(Error::Validation(format!(
                    "{name}[{r}][{c}] is {v}, expected a finite value"
                )));
            }
        }
    }
    Ok(())
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<PayoffMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::Validation(format!("{name} has no actions")));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Validation(format!(
                "{name} row {r} has length {}, expected {ncols}",
                row.len()
            )));
        }
    }
    let m = DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]);
    check_matrix(name, &m)?;
    Ok(m)
}

fn matrix_rows(m: &PayoffMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

/// Half-open real interval `[lo, hi)` used for uniform draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn sample(&self, rng: &mut impl rand::RngCore) -> f64 {
        rng::uniform(rng, self.lo, self.hi)
    }

    /// CDF of the uniform distribution on this interval.
    pub fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Config(format!(
                "{name} [{}, {}] must be finite with lo < hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Parameters of the random coordination-game generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameGenConfig {
    pub num_actions: usize,
    pub seed: u64,
    pub coordination_range: Interval,
    pub risky_offdiag_range: Interval,
    pub safe_offdiag_range: Interval,
    pub risky_quantile: f64,
}

impl GameGenConfig {
    pub fn new(num_actions: usize, seed: u64) -> Self {
        GameGenConfig {
            num_actions,
            seed,
            coordination_range: Interval::new(5.0, 15.0),
            risky_offdiag_range: Interval::new(-10.0, 15.0),
            safe_offdiag_range: Interval::new(0.0, 10.0),
            risky_quantile: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_actions < 2 {
            return Err(Error::Config(format!(
                "num_actions must be >= 2, got {}",
                self.num_actions
            )));
        }
        self.coordination_range.validate("coordination_range")?;
        self.risky_offdiag_range.validate("risky_offdiag_range")?;
        self.safe_offdiag_range.validate("safe_offdiag_range")?;
        if !(self.risky_quantile > 0.0 && self.risky_quantile < 1.0) {
            return Err(Error::Config(format!(
                "risky_quantile must lie in (0, 1), got {}",
                self.risky_quantile
            )));
        }
        Ok(())
    }
}

/// A generated coordination game together with the generator's gate decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationGame {
    pub game: Game,
    /// `risky[i]` is set when action `i` drew its off-diagonals from the risky range.
    pub risky: Vec<bool>,
}

/// Random symmetric coordination game with rare high-risk, high-reward actions.
///
/// For each action `i` in order: draw `p` from the coordination range and set
/// the diagonal to `|p|`; if the coordination CDF at `p` exceeds
/// `risky_quantile`, every off-diagonal pair `(i, j) = (j, i)` is redrawn from
/// the risky range, otherwise from the safe range. Later actions overwrite
/// the pairs they share with earlier ones.
pub fn generate_coordination_game(cfg: &GameGenConfig) -> Result<Game> {
    generate_coordination_game_detailed(cfg).map(|g| g.game)
}

pub fn generate_coordination_game_detailed(cfg: &GameGenConfig) -> Result<CoordinationGame> {
    cfg.validate()?;
    let n = cfg.num_actions;
    let mut rng = rng::seeded(cfg.seed);
    let mut p = DMatrix::zeros(n, n);
    let mut risky = vec![false; n];
    for i in 0..n {
        let draw = cfg.coordination_range.sample(&mut rng);
        p[(i, i)] = draw.abs();
        risky[i] = cfg.coordination_range.cdf(draw) > cfg.risky_quantile;
        let range = if risky[i] {
            cfg.risky_offdiag_range
        } else {
            cfg.safe_offdiag_range
        };
        for j in (0..n).filter(|&j| j != i) {
            let v = range.sample(&mut rng);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    Ok(CoordinationGame {
        game: Game::symmetric(p)?,
        risky,
    })
}

/// Symmetric 2x2 "stay or overtake" dilemma.
///
/// Action 0 (stay) earns `safe_payoff` whatever the opponent does; action 1
/// (overtake) earns `coord_payoff` against stay and `crash_payoff` against
/// overtake.
pub fn make_risk_dilemma(safe_payoff: f64, coord_payoff: f64, crash_payoff: f64) -> Result<Game> {
    if !(crash_payoff < safe_payoff && safe_payoff < coord_payoff) {
        return Err(Error::Config(format!(
            "risk dilemma needs crash < safe < coord, got {crash_payoff}, {safe_payoff}, {coord_payoff}"
        )));
    }
    Game::symmetric(DMatrix::from_row_slice(
        2,
        2,
        &[safe_payoff, safe_payoff, coord_payoff, crash_payoff],
    ))
}

/// Copy of a symmetric game with every diagonal entry negated.
pub fn anti_coordination(game: &Game) -> Result<Game> {
    if !game.is_symmetric() {
        return Err(Error::Validation("anti_coordination needs a symmetric game".into()));
    }
    let mut m = game.payoff(Player::One).clone();
    for i in 0..m.nrows() {
        m[(i, i)] = -m[(i, i)];
    }
    Game::symmetric(m)
}

/// Symmetric-action game with independent uniform payoffs for each player.
pub fn random_game(num_actions: usize, seed: u64, range: Interval) -> Result<Game> {
    if num_actions == 0 {
        return Err(Error::Config("random_game needs at least one action".into()));
    }
    range.validate("range")?;
    let mut rng = rng::seeded(seed);
    let mut draw = || DMatrix::from_fn(num_actions, num_actions, |_, _| range.sample(&mut rng));
    let p1 = draw();
    let p2 = draw();
    Game::asymmetric(p1, p2)
}

// ---------------------------------------------------------------------------
// JSON format

#[derive(Serialize, Deserialize)]
struct GameFile {
    symmetric: bool,
    payoff_p1: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payoff_p2: Option<Vec<Vec<Entry>>>,
}

/// A payoff entry. Finite values are JSON numbers; the loader also accepts the
/// strings `"NaN"`, `"Infinity"` and `"-Infinity"` so that such files fail
/// validation instead of parsing.
#[derive(Clone, Copy)]
struct Entry(f64);

impl Serialize for Entry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct EntryVisitor;
        impl Visitor<'_> for EntryVisitor {
            type Value = Entry;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Entry, E> {
                Ok(Entry(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Entry, E> {
                Ok(Entry(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Entry, E> {
                Ok(Entry(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Entry, E> {
                match v {
                    "NaN" => Ok(Entry(f64::NAN)),
                    "Infinity" | "inf" => Ok(Entry(f64::INFINITY)),
                    "-Infinity" | "-inf" => Ok(Entry(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(EntryVisitor)
    }
}

fn to_rows(rows: Vec<Vec<Entry>>) -> Vec<Vec<f64>> {
    rows.into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect()
}

fn to_entries(m: &PayoffMatrix) -> Vec<Vec<Entry>> {
    matrix_rows(m)
        .into_iter()
        .map(|r| r.into_iter().map(Entry).collect())
        .collect()
}

/// Render a game in the JSON game format (one matrix row per line).
pub fn game_to_json(game: &Game) -> String {
    fn write_matrix(out: &mut String, m: &PayoffMatrix) {
        out.push_str("[\n");
        let rows = to_entries(m);
        for (r, row) in rows.iter().enumerate() {
            out.push_str("    ");
            out.push_str(&serde_json::to_string(row).expect("finite payoffs serialize"));
            out.push_str(if r + 1 < rows.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]");
    }
    let mut out = String::new();
    out.push_str("{\n  \"symmetric\": ");
    out.push_str(if game.symmetric { "true" } else { "false" });
    out.push_str(",\n  \"payoff_p1\": ");
    write_matrix(&mut out, game.payoff(Player::One));
    if !game.symmetric {
        out.push_str(",\n  \"payoff_p2\": ");
        write_matrix(&mut out, game.payoff(Player::Two));
    }
    out.push_str("\n}\n");
    out
}

pub fn game_from_json(text: &str) -> Result<Game> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let p1 = matrix_from_rows("payoff_p1", &to_rows(file.payoff_p1))?;
    match (file.symmetric, file.payoff_p2) {
        (true, None) => Game::symmetric(p1),
        (true, Some(p2)) => {
            let p2 = matrix_from_rows("payoff_p2", &to_rows(p2))?;
            if p2 != p1 {
                return Err(Error::Validation(
                    "symmetric game has a payoff_p2 that differs from payoff_p1".into(),
                ));
            }
            Game::symmetric(p1)
        }
        (false, Some(p2)) => Game::asymmetric(p1, matrix_from_rows("payoff_p2", &to_rows(p2))?),
        (false, None) => Err(Error::Validation("asymmetric game is missing payoff_p2".into())),
    }
}

pub fn save_game(game: &Game, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, game_to_json(game))?;
    Ok(())
}

pub fn load_game(path: impl AsRef<Path>) -> Result<Game> {
    game_from_json(&fs::read_to_string(path)?)
}
