//! Transmission power `P(d) = eps * d^alpha` and per-agent energy bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel<S> {
    pub epsilon: S,
    /// Path-loss exponent, within `[2, 4]`.
    pub alpha: S,
}

impl<S: Scalar> PowerModel<S> {
    pub fn new(epsilon: S, alpha: S) -> Result<Self> {
        let model = PowerModel { epsilon, alpha };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > S::zero()) || !self.epsilon.is_finite() {
            return Err(Error::Validation(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.alpha >= S::lit(2.0) && self.alpha <= S::lit(4.0)) {
            return Err(Error::Validation(format!("alpha must lie in [2, 4], got {}", self.alpha)));
        }
        Ok(())
    }
}

impl Default for PowerModel<f64> {
    fn default() -> Self {
        PowerModel { epsilon: 1.0, alpha: 2.0 }
    }
}

/// Power needed to reach distance `d`.
pub fn transmit_power<S: Scalar>(d: S, model: &PowerModel<S>) -> S {
    assert!(d >= S::zero(), "transmission radius must be nonnegative, got {d}");
    model.epsilon * d.powf(model.alpha)
}

/// Step-by-step energy record. Row `k` holds every agent's energy at step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger<S> {
    n_agents: usize,
    per_step: Vec<Vec<S>>,
    per_agent_total: Vec<S>,
    team_total: S,
}

impl<S: Scalar> EnergyLedger<S> {
    pub fn new(n_agents: usize) -> Self {
        EnergyLedger {
            n_agents,
            per_step: Vec::new(),
            per_agent_total: vec![S::zero(); n_agents],
            team_total: S::zero(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn steps(&self) -> usize {
        self.per_step.len()
    }

    pub fn step(&self, k: usize) -> &[S] {
        &self.per_step[k]
    }

    pub fn per_step(&self) -> &[Vec<S>] {
        &self.per_step
    }

    pub fn per_agent_total(&self) -> &[S] {
        &self.per_agent_total
    }

    pub fn team_total(&self) -> S {
        self.team_total
    }

    /// Team energy of one step.
    pub fn team_step(&self, k: usize) -> S {
        self.per_step[k].iter().fold(S::zero(), |a, &b| a + b)
    }

    /// Team energy summed over steps in `range`.
    pub fn window_total(&self, range: std::ops::Range<usize>) -> S {
        let end = range.end.min(self.per_step.len());
        (range.start.min(end)..end).fold(S::zero(), |acc, k| acc + self.team_step(k))
    }

    /// Appends one row of already-computed step energies.
    pub fn push_row(&mut self, row: Vec<S>) {
        assert_eq!(row.len(), self.n_agents, "energy row length");
        let mut step_sum = S::zero();
        for (total, &e) in self.per_agent_total.iter_mut().zip(&row) {
            *total = *total + e;
            step_sum = step_sum + e;
        }
        self.team_total = self.team_total + step_sum;
        self.per_step.push(row);
    }

    /// Charges `weight * P(d_i)` to every agent.
    pub fn accrue_weighted(&mut self, radii: &[S], model: &PowerModel<S>, weight: S) {
        let row = radii.iter().map(|&d| weight * transmit_power(d, model)).collect();
        self.push_row(row);
    }
}

/// Charges one step of transmission at the given radii.
pub fn accrue_step<S: Scalar>(mut ledger: EnergyLedger<S>, radii: &[S], model: &PowerModel<S>) -> EnergyLedger<S> {
    ledger.accrue_weighted(radii, model, S::one());
    ledger
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyComparison<S> {
    pub total_a: S,
    pub total_b: S,
    /// `total_a / total_b`; `None` when `total_b` is zero.
    pub ratio: Option<S>,
    pub per_agent: Vec<(S, S)>,
}

pub fn compare_totals<S: Scalar>(a: &EnergyLedger<S>, b: &EnergyLedger<S>) -> Result<EnergyComparison<S>> {
    if a.n_agents != b.n_agents {
        return Err(Error::AgentCountMismatch { left: a.n_agents, right: b.n_agents });
    }
    let ratio = (b.team_total != S::zero()).then(|| a.team_total / b.team_total);
    Ok(EnergyComparison {
        total_a: a.team_total,
        total_b: b.team_total,
        ratio,
        per_agent: a.per_agent_total.iter().copied().zip(b.per_agent_total.iter().copied()).collect(),
    })
}
