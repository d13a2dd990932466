//! Risk-averse equilibria for two-player normal-form games and
//! population-based (PSRO) games.
//!
//! A risk-averse player maximises `σᵀMς − γ σᵀΣσ` over mixed strategies
//! with every action probability at least `ε`, where `Σ` is the covariance
//! of its payoffs weighted by the opponent's strategy `ς`. The crate
//! provides the risk measures ([`risk`]), the best-response quadratic
//! program ([`qp`]), fictitious-play style solvers ([`solvers`]),
//! environments ([`envs`]) and PSRO ([`psro`]).

pub mod envs;
pub mod error;
pub mod game;
pub mod psro;
pub mod qp;
pub mod risk;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use game::{Game, MixedStrategy, PayoffMatrix, Player};
pub use qp::{risk_averse_best_response, BestResponseResult};
pub use risk::RiskProfile;
