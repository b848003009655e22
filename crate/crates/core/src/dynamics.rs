//! Single-integrator agents driven by a saturated consensus law.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AgentId;
use crate::scalar::Scalar;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput<S> {
    pub vector: Vec2<S>,
    /// Whether the saturation branch was taken.
    pub saturated: bool,
}

impl<S: Scalar> ControlInput<S> {
    pub fn zero() -> Self {
        ControlInput { vector: Vec2::zero(), saturated: false }
    }

    pub fn norm(&self) -> S {
        self.vector.norm()
    }
}

/// Sampling period `t`, control bound `gamma`, team size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams<S> {
    pub t: S,
    pub gamma: S,
    pub n_agents: usize,
}

impl<S: Scalar> SimParams<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > S::zero()) || !self.t.is_finite() {
            return Err(Error::Validation(format!("T must be positive and finite, got {}", self.t)));
        }
        if !(self.gamma > S::zero()) || !self.gamma.is_finite() {
            return Err(Error::Validation(format!("gamma must be positive and finite, got {}", self.gamma)));
        }
        if self.n_agents == 0 {
            return Err(Error::Validation("at least one agent required".into()));
        }
        if self.t * S::from_usize_lossy(self.n_agents) >= S::one() {
            return Err(Error::Validation(format!("T must be < 1/N (T = {}, N = {})", self.t, self.n_agents)));
        }
        Ok(())
    }
}

/// Norm clamp: `z` if `|z| <= gamma`, else `gamma z / |z|`.
pub fn saturate<S: Scalar>(z: Vec2<S>, gamma: S) -> Vec2<S> {
    saturate_flagged(z, gamma).0
}

fn saturate_flagged<S: Scalar>(z: Vec2<S>, gamma: S) -> (Vec2<S>, bool) {
    let norm = z.norm();
    if norm <= gamma {
        (z, false)
    } else {
        (z.scale(gamma / norm), true)
    }
}

/// Sum of `own - neighbor` over the given neighbor positions.
fn disagreement<S: Scalar>(own: Vec2<S>, neighbors: impl IntoIterator<Item = Vec2<S>>) -> Vec2<S> {
    neighbors.into_iter().fold(Vec2::zero(), |acc, rj| acc + (own - rj))
}

/// Saturated consensus input computed from an arbitrary set of neighbor
/// positions (possibly stale copies held between broadcasts).
pub fn bounded_control_from<S: Scalar>(
    own: Vec2<S>,
    neighbors: impl IntoIterator<Item = Vec2<S>>,
    gamma: S,
) -> ControlInput<S> {
    let (v, saturated) = saturate_flagged(disagreement(own, neighbors), gamma);
    ControlInput { vector: -v, saturated }
}

/// `u_i = -sat(sum_{j in incoming} (r_i - r_j))`.
pub fn bounded_control<S: Scalar>(
    i: AgentId,
    positions: &[Vec2<S>],
    incoming: &BTreeSet<AgentId>,
    gamma: S,
) -> ControlInput<S> {
    debug_assert!(!incoming.contains(&i));
    bounded_control_from(positions[i.0], incoming.iter().map(|j| positions[j.0]), gamma)
}

/// Unsaturated baseline `u_i = -sum_{j in incoming} (r_i - r_j)`.
pub fn unbounded_control<S: Scalar>(i: AgentId, positions: &[Vec2<S>], incoming: &BTreeSet<AgentId>) -> Vec2<S> {
    -disagreement(positions[i.0], incoming.iter().map(|j| positions[j.0]))
}

/// Synchronous position update `r_i[k+1] = r_i[k] + T u_i[k]`.
pub fn step_all<S: Scalar>(positions: &[Vec2<S>], controls: &[Vec2<S>], t: S) -> Result<Vec<Vec2<S>>> {
    if positions.len() != controls.len() {
        return Err(Error::LengthMismatch { expected: positions.len(), got: controls.len() });
    }
    positions
        .iter()
        .zip(controls)
        .enumerate()
        .map(|(agent, (&r, &u))| {
            if !r.is_finite() || !u.is_finite() || !t.is_finite() {
                return Err(Error::NonFinite { step: 0, agent });
            }
            Ok(r + u.scale(t))
        })
        .collect()
}
