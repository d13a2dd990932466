use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::envs::Policy;
use crate::error::{Error, Result};
use crate::rng;

/// A row-stochastic table: one action distribution per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy {
    num_observations: usize,
    num_actions: usize,
    /// Row-major `num_observations × num_actions`.
    probs: Vec<f64>,
}

impl TabularPolicy {
    pub fn uniform(num_observations: usize, num_actions: usize) -> Self {
        TabularPolicy {
            num_observations,
            num_actions,
            probs: vec![1.0 / num_actions as f64; num_observations * num_actions],
        }
    }

    /// Softmax of a logit table with the same layout.
    pub fn from_logits(num_observations: usize, num_actions: usize, logits: &[f64]) -> Result<Self> {
        if logits.len() != num_observations * num_actions {
            return Err(Error::Validation(format!(
                "expected {} logits, got {}",
                num_observations * num_actions,
                logits.len()
            )));
        }
        let mut probs = Vec::with_capacity(logits.len());
        for row in logits.chunks(num_actions) {
            probs.extend_from_slice(crate::solvers::softmax(row, 1.0).probs());
        }
        let policy = TabularPolicy {
            num_observations,
            num_actions,
            probs,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_actions == 0 || self.probs.len() != self.num_observations * self.num_actions {
            return Err(Error::Validation("policy table has the wrong shape".into()));
        }
        for (o, row) in self.probs.chunks(self.num_actions).enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!("policy row {o} is not a distribution")));
            }
        }
        Ok(())
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, observation: usize) -> &[f64] {
        &self.probs[observation * self.num_actions..(observation + 1) * self.num_actions]
    }
}

impl Policy for TabularPolicy {
    fn act(&self, observation: usize, rng: &mut dyn RngCore) -> usize {
        rng::categorical(rng, self.row(observation))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// A pure action of a normal-form game.
    NfgPure(usize),
    Tabular(TabularPolicy),
}

/// A policy in a PSRO population. `id` is its index in the population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyHandle {
    pub id: usize,
    pub kind: PolicyKind,
}

impl PolicyHandle {
    /// Distribution over actions in a single-state environment.
    pub fn action_distribution(&self, num_actions: usize) -> Vec<f64> {
        match &self.kind {
            PolicyKind::NfgPure(a) => {
                let mut d = vec![0.0; num_actions];
                d[*a] = 1.0;
                d
            }
            PolicyKind::Tabular(t) => t.row(0).to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("policies serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let handle: PolicyHandle = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if let PolicyKind::Tabular(t) = &handle.kind {
            t.validate()?;
        }
        Ok(handle)
    }
}

impl Policy for PolicyHandle {
    fn act(&self, observation: usize, rng: &mut dyn RngCore) -> usize {
        match &self.kind {
            PolicyKind::NfgPure(a) => *a,
            PolicyKind::Tabular(t) => t.act(observation, rng),
        }
    }
}
