//! Per-agent transmission radius rules.
//!
//! Every rule sees only agent-local data from the current step: its own
//! position, the positions of its outgoing neighbors, and its own control.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::ControlInput;
use crate::error::{Error, Result};
use crate::graph::AgentId;
use crate::scalar::Scalar;
use crate::vec2::Vec2;

/// Broadcast slot of one agent: transmits at `offset + s * period`, `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub period: usize,
    #[serde(default)]
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    slots: Vec<Slot>,
}

impl Schedule {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if let Some((i, _)) = slots.iter().enumerate().find(|(_, s)| s.period == 0) {
            return Err(Error::Validation(format!("broadcast period of agent {} must be >= 1", i + 1)));
        }
        Ok(Schedule { slots })
    }

    /// Every agent broadcasts every `period` steps starting at step 0.
    pub fn uniform(n_agents: usize, period: usize) -> Result<Self> {
        Schedule::new(vec![Slot { period, offset: 0 }; n_agents])
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn broadcasts_at(&self, i: usize, step: usize) -> bool {
        let s = self.slots[i];
        step >= s.offset && (step - s.offset).is_multiple_of(s.period)
    }

    /// Most recent broadcast step `<= step`, if any.
    pub fn last_broadcast(&self, i: usize, step: usize) -> Option<usize> {
        let s = self.slots[i];
        (step >= s.offset).then(|| step - (step - s.offset) % s.period)
    }

    pub fn gap(&self, i: usize) -> usize {
        self.slots[i].period
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedDelta<S> {
    /// One radius shared by every agent.
    Common(S),
    /// Each agent keeps its initial radius forever.
    PerAgentInitial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RangePolicy<S> {
    Preserving,
    Modified,
    Intermittent { schedule: Schedule },
    Fixed { delta: FixedDelta<S> },
}

impl<S: Scalar> RangePolicy<S> {
    pub fn label(&self) -> String {
        match self {
            RangePolicy::Preserving => "preserving".into(),
            RangePolicy::Modified => "modified".into(),
            RangePolicy::Intermittent { schedule } => {
                let gaps: BTreeSet<usize> = schedule.slots.iter().map(|s| s.period).collect();
                let offsets = schedule.slots.iter().any(|s| s.offset != 0);
                if gaps.len() == 1 && !offsets {
                    format!("intermittent-{}", gaps.first().unwrap())
                } else {
                    "intermittent".into()
                }
            }
            RangePolicy::Fixed { delta: FixedDelta::Common(d) } => format!("fixed-{d}"),
            RangePolicy::Fixed { delta: FixedDelta::PerAgentInitial } => "fixed".into(),
        }
    }

    pub fn validate(&self, n_agents: usize) -> Result<()> {
        match self {
            RangePolicy::Fixed { delta: FixedDelta::Common(d) } if !(*d > S::zero()) || !d.is_finite() => {
                Err(Error::Validation(format!("fixed delta must be > 0, got {d}")))
            }
            RangePolicy::Intermittent { schedule } if schedule.len() != n_agents => {
                Err(Error::Validation(format!("schedule has {} entries for {} agents", schedule.len(), n_agents)))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeReason {
    PreserveEdges,
    CompleteGraphBound,
    IdleNoBroadcast,
    Fixed,
}

impl fmt::Display for RangeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RangeReason::PreserveEdges => "preserve_edges",
            RangeReason::CompleteGraphBound => "complete_graph_bound",
            RangeReason::IdleNoBroadcast => "idle_no_broadcast",
            RangeReason::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeDecision<S> {
    pub radius: S,
    pub reason: RangeReason,
}

fn max_distance<S: Scalar>(center: Vec2<S>, positions: &[Vec2<S>], among: impl IntoIterator<Item = usize>) -> S {
    among.into_iter().map(|j| center.dist(positions[j])).fold(S::zero(), S::max)
}

/// Farthest outgoing neighbor plus `gap` steps of worst-case relative motion.
fn motion_budget_radius<S: Scalar>(
    i: AgentId,
    positions: &[Vec2<S>],
    outgoing: &BTreeSet<AgentId>,
    u_i: &ControlInput<S>,
    gamma: S,
    t: S,
    gap: usize,
) -> S {
    if outgoing.is_empty() {
        return S::zero();
    }
    let reach = max_distance(positions[i.0], positions, outgoing.iter().map(|j| j.0));
    reach + S::from_usize_lossy(gap) * (u_i.norm() + gamma) * t
}

/// Radius that keeps every current outgoing edge alive one step ahead:
/// `max_j |r_i - r_j| + (|u_i| + gamma) T`. Zero when there is nothing to keep.
pub fn preserving_range<S: Scalar>(
    i: AgentId,
    positions: &[Vec2<S>],
    outgoing: &BTreeSet<AgentId>,
    u_i: &ControlInput<S>,
    gamma: S,
    t: S,
) -> RangeDecision<S> {
    RangeDecision {
        radius: motion_budget_radius(i, positions, outgoing, u_i, gamma, t, 1),
        reason: RangeReason::PreserveEdges,
    }
}

/// Preserving rule until the agent reaches everyone, then twice its farthest
/// distance, which shrinks to zero as the team converges.
pub fn modified_range<S: Scalar>(
    i: AgentId,
    positions: &[Vec2<S>],
    outgoing: &BTreeSet<AgentId>,
    u_i: &ControlInput<S>,
    gamma: S,
    t: S,
    n_agents: usize,
) -> RangeDecision<S> {
    let covers_everyone = outgoing.iter().filter(|j| j.0 != i.0 && j.0 < n_agents).count() + 1 == n_agents;
    if covers_everyone {
        let reach = max_distance(positions[i.0], positions, 0..n_agents);
        RangeDecision { radius: reach + reach, reason: RangeReason::CompleteGraphBound }
    } else {
        preserving_range(i, positions, outgoing, u_i, gamma, t)
    }
}

/// Radius for the next broadcast, `steps_until_next` steps away, computed from
/// the state at the current broadcast.
pub fn intermittent_range<S: Scalar>(
    i: AgentId,
    positions_at_broadcast: &[Vec2<S>],
    outgoing_at_broadcast: &BTreeSet<AgentId>,
    u_i: &ControlInput<S>,
    gamma: S,
    t: S,
    steps_until_next: usize,
) -> RangeDecision<S> {
    assert!(steps_until_next >= 1, "broadcast gap must be at least one step");
    RangeDecision {
        radius: motion_budget_radius(i, positions_at_broadcast, outgoing_at_broadcast, u_i, gamma, t, steps_until_next),
        reason: RangeReason::PreserveEdges,
    }
}

/// Constant radius of the fixed baseline. `initial_radius` is used only by the
/// per-agent variant.
pub fn fixed_range<S: Scalar>(policy: &RangePolicy<S>, initial_radius: S) -> RangeDecision<S> {
    let radius = match policy {
        RangePolicy::Fixed { delta: FixedDelta::Common(d) } => *d,
        RangePolicy::Fixed { delta: FixedDelta::PerAgentInitial } => initial_radius,
        other => panic!("fixed_range called with {} policy", other.label()),
    };
    RangeDecision { radius, reason: RangeReason::Fixed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::bounded_control;

    fn four_agents() -> Vec<Vec2<f64>> {
        vec![Vec2::new(2.0, 2.0), Vec2::new(1.4, 3.2), Vec2::new(3.7, 5.2), Vec2::new(4.5, 4.3)]
    }

    fn set(v: &[usize]) -> BTreeSet<AgentId> {
        v.iter().map(|&i| AgentId(i)).collect()
    }

    fn four_agents_u1() -> ControlInput<f64> {
        bounded_control(AgentId(0), &four_agents(), &set(&[1]), 1.0)
    }

    #[test]
    fn preserving_four_agents_agent_one() {
        // max(|r1-r2|, |r1-r4|) = sqrt(11.54), |u1| = 1, gamma = 1, T = 0.1
        let d = preserving_range(AgentId(0), &four_agents(), &set(&[1, 3]), &four_agents_u1(), 1.0, 0.1);
        let expect = 11.54f64.sqrt() + 0.2;
        assert!((d.radius - expect).abs() < 1e-12);
        assert!((d.radius - 3.597).abs() < 1e-3);
        assert_eq!(d.reason, RangeReason::PreserveEdges);
    }

    #[test]
    fn preserving_floor_at_consensus() {
        let p = vec![Vec2::new(1.0, 1.0); 3];
        let d: RangeDecision<f64> = preserving_range(AgentId(1), &p, &set(&[0, 2]), &ControlInput::zero(), 2.0, 0.1);
        assert!((d.radius - 0.2).abs() < 1e-15);
        let d = preserving_range(AgentId(1), &p, &BTreeSet::new(), &ControlInput::zero(), 2.0, 0.1);
        assert_eq!(d.radius, 0.0);
    }

    #[test]
    fn modified_branches() {
        let p = four_agents();
        let u = four_agents_u1();
        let m = modified_range(AgentId(0), &p, &set(&[1, 3]), &u, 1.0, 0.1, 4);
        assert_eq!(m, preserving_range(AgentId(0), &p, &set(&[1, 3]), &u, 1.0, 0.1));

        // agent 1 reaching everyone: 2 * |r1 - r3|
        let m = modified_range(AgentId(0), &p, &set(&[1, 2, 3]), &u, 1.0, 0.1, 4);
        assert_eq!(m.reason, RangeReason::CompleteGraphBound);
        assert!((m.radius - 2.0 * 13.13f64.sqrt()).abs() < 1e-12);

        let same = vec![Vec2::new(-3.0, 2.0); 4];
        let m = modified_range(AgentId(2), &same, &set(&[0, 1, 3]), &ControlInput::zero(), 1.0, 0.1, 4);
        assert_eq!(m.radius, 0.0);
        assert_eq!(m.reason, RangeReason::CompleteGraphBound);
    }

    #[test]
    fn modified_single_agent() {
        let m =
            modified_range(AgentId(0), &[Vec2::new(1.0, 1.0)], &BTreeSet::new(), &ControlInput::zero(), 1.0, 0.1, 1);
        assert_eq!(m.radius, 0.0);
    }

    #[test]
    fn intermittent_scales_budget() {
        let p = four_agents();
        let u = four_agents_u1();
        let out = set(&[1, 3]);
        assert_eq!(
            intermittent_range(AgentId(0), &p, &out, &u, 1.0, 0.1, 1),
            preserving_range(AgentId(0), &p, &out, &u, 1.0, 0.1)
        );
        let d = intermittent_range(AgentId(0), &p, &out, &u, 1.0, 0.1, 3);
        assert!((d.radius - (11.54f64.sqrt() + 0.6)).abs() < 1e-12);
        assert!((d.radius - 3.997).abs() < 1e-3);
        assert_eq!(intermittent_range(AgentId(0), &p, &BTreeSet::new(), &u, 1.0, 0.1, 3).radius, 0.0);
    }

    #[test]
    fn fixed_variants() {
        let common = RangePolicy::Fixed { delta: FixedDelta::Common(3.5) };
        assert_eq!(fixed_range(&common, 9.0).radius, 3.5);
        let per = RangePolicy::Fixed { delta: FixedDelta::PerAgentInitial };
        assert_eq!(fixed_range(&per, 1.4).radius, 1.4);
        assert!(RangePolicy::Fixed { delta: FixedDelta::Common(0.0) }.validate(4).is_err());
        assert!(common.validate(4).is_ok());
    }

    #[test]
    #[should_panic]
    fn fixed_range_wrong_kind() {
        fixed_range(&RangePolicy::<f64>::Modified, 1.0);
    }

    #[test]
    fn schedule_queries() {
        assert!(Schedule::uniform(3, 0).is_err());
        let s = Schedule::new(vec![Slot { period: 3, offset: 0 }, Slot { period: 2, offset: 1 }]).unwrap();
        let b0: Vec<bool> = (0..7).map(|k| s.broadcasts_at(0, k)).collect();
        assert_eq!(b0, [true, false, false, true, false, false, true]);
        let b1: Vec<bool> = (0..6).map(|k| s.broadcasts_at(1, k)).collect();
        assert_eq!(b1, [false, true, false, true, false, true]);
        assert_eq!(s.last_broadcast(0, 5), Some(3));
        assert_eq!(s.last_broadcast(1, 0), None);
        assert_eq!(s.last_broadcast(1, 4), Some(3));
        let p: RangePolicy<f64> = RangePolicy::Intermittent { schedule: s };
        assert!(p.validate(3).is_err());
        assert!(p.validate(2).is_ok());
    }
}
