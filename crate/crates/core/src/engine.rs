//! Step loop: topology, controls, next radii, position update, energy.
//!
//! All per-step quantities are computed from the step-`k` state before any
//! position advances.

use std::collections::BTreeSet;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{bounded_control, bounded_control_from, step_all, ControlInput, SimParams};
use crate::energy::{transmit_power, EnergyLedger, PowerModel};
use crate::error::{Error, Result};
use crate::graph::{has_directed_spanning_tree, outgoing_neighbors, snapshot, AgentId, TopologySnapshot};
use crate::range_policy::{
    fixed_range, intermittent_range, modified_range, preserving_range, FixedDelta, RangeDecision, RangePolicy,
    RangeReason, Schedule,
};
use crate::scalar::Scalar;
use crate::vec2::Vec2;

/// How step energies are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EnergyAccounting {
    /// Multiply each step's power by `T`.
    #[serde(default)]
    pub times_t: bool,
    /// Charge the initial radii at step 0. Off by default: sums start at step 1.
    #[serde(default)]
    pub include_initial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S> {
    pub initial_positions: Vec<Vec2<S>>,
    pub initial_radii: Vec<S>,
    pub params: SimParams<S>,
    pub policy: RangePolicy<S>,
    pub power: PowerModel<S>,
    pub accounting: EnergyAccounting,
    pub max_steps: usize,
    pub consensus_tol: S,
    /// Stop as soon as the diameter drops below `consensus_tol`. Policy
    /// comparisons turn this off so every variant covers the same horizon.
    pub stop_at_consensus: bool,
    /// Radius used when an agent has no outgoing neighbor to preserve.
    pub idle_beacon_radius: S,
    pub rng_seed: Option<u64>,
}

impl<S: Scalar> Scenario<S> {
    pub fn n_agents(&self) -> usize {
        self.initial_positions.len()
    }

    /// Four-agent reference setup: positions (2,2), (1.4,3.2), (3.7,5.2), (4.5,4.3), radii
    /// 3.5, 2.5, 1.5, 1.4, `T = 0.1`, `eps = 1`, `alpha = 2` and `gamma = 1`.
    pub fn four_agent_reference(policy: RangePolicy<S>) -> Self {
        let l = S::lit;
        Scenario {
            initial_positions: vec![
                Vec2::new(l(2.0), l(2.0)),
                Vec2::new(l(1.4), l(3.2)),
                Vec2::new(l(3.7), l(5.2)),
                Vec2::new(l(4.5), l(4.3)),
            ],
            initial_radii: vec![l(3.5), l(2.5), l(1.5), l(1.4)],
            params: SimParams { t: l(0.1), gamma: l(1.0), n_agents: 4 },
            policy,
            power: PowerModel { epsilon: l(1.0), alpha: l(2.0) },
            accounting: EnergyAccounting::default(),
            max_steps: 10_000,
            consensus_tol: l(1e-6),
            stop_at_consensus: true,
            idle_beacon_radius: S::zero(),
            rng_seed: None,
        }
    }

    pub fn with_policy(&self, policy: RangePolicy<S>) -> Self {
        Scenario { policy, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_agents();
        if n == 0 {
            return Err(Error::Validation("at least one agent required".into()));
        }
        if self.initial_radii.len() != n {
            return Err(Error::Validation(format!("{} radii for {} agents", self.initial_radii.len(), n)));
        }
        if self.params.n_agents != n {
            return Err(Error::Validation(format!("params declare {} agents, found {}", self.params.n_agents, n)));
        }
        self.params.validate()?;
        for (i, (p, d)) in self.initial_positions.iter().zip(&self.initial_radii).enumerate() {
            if !p.is_finite() {
                return Err(Error::Validation(format!("agent {} has a non-finite position", i + 1)));
            }
            if !(*d >= S::zero()) || !d.is_finite() {
                return Err(Error::Validation(format!("agent {} radius must be finite and >= 0, got {}", i + 1, d)));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Validation("max_steps must be >= 1".into()));
        }
        if !(self.consensus_tol > S::zero()) {
            return Err(Error::Validation(format!("consensus_tol must be > 0, got {}", self.consensus_tol)));
        }
        if !(self.idle_beacon_radius >= S::zero()) || !self.idle_beacon_radius.is_finite() {
            return Err(Error::Validation("idle_beacon_radius must be finite and >= 0".into()));
        }
        self.policy.validate(n)?;
        self.power.validate()
    }

    /// Stable digest of every field that influences the run.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{self:?}").as_bytes());
        hex::encode(&h.finalize()[..16])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Consensus,
    MaxSteps,
}

/// Everything observed and decided at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<S> {
    pub step: usize,
    pub positions: Vec<Vec2<S>>,
    /// Radius each agent transmits with at this step (0 when silent).
    pub radii: Vec<S>,
    pub controls: Vec<ControlInput<S>>,
    /// Links in effect at this step.
    pub topology: TopologySnapshot,
    /// Radius decided at this step for the agent's next transmission.
    pub decisions: Vec<RangeDecision<S>>,
    pub broadcasting: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace<S> {
    pub scenario_hash: String,
    pub policy_label: String,
    pub n_agents: usize,
    pub sampling_period: S,
    pub records: Vec<StepRecord<S>>,
    pub energy: EnergyLedger<S>,
    pub termination: Termination,
    /// Number of position updates performed; `records.len() == steps_executed + 1`.
    pub steps_executed: usize,
}

impl<S: Scalar> SimulationTrace<S> {
    pub fn final_positions(&self) -> &[Vec2<S>] {
        &self.records.last().expect("trace holds the initial state").positions
    }

    pub fn diameters(&self) -> Vec<S> {
        self.records.iter().map(|r| diameter(&r.positions)).collect()
    }

    pub fn final_diameter(&self) -> S {
        diameter(self.final_positions())
    }

    pub fn spanning_tree_at_start(&self) -> bool {
        has_directed_spanning_tree(&self.records[0].topology)
    }

    /// First step from which every later topology is complete.
    pub fn complete_phase_start(&self) -> Option<usize> {
        let last_incomplete = self.records.iter().rposition(|r| !r.topology.is_complete());
        match last_incomplete {
            None => Some(0),
            Some(k) if k + 1 < self.records.len() => Some(k + 1),
            Some(_) => None,
        }
    }

    /// Radius series of one agent.
    pub fn radii_of(&self, agent: usize) -> Vec<S> {
        self.records.iter().map(|r| r.radii[agent]).collect()
    }
}

/// Largest pairwise distance; 0 for a single agent.
pub fn diameter<S: Scalar>(positions: &[Vec2<S>]) -> S {
    let mut best = S::zero();
    for (a, pa) in positions.iter().enumerate() {
        for pb in &positions[a + 1..] {
            best = best.max(pa.dist(*pb));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contraction<S> {
    /// Largest one-step diameter ratio over the complete-graph steps.
    pub beta: S,
    /// Set when every complete-graph step already had zero diameter.
    pub degenerate: bool,
    pub steps_used: usize,
}

/// Worst observed `diameter(k+1) / diameter(k)` over steps whose topology is complete.
pub fn contraction_estimate<S: Scalar>(trace: &SimulationTrace<S>) -> Result<Contraction<S>> {
    let diam = trace.diameters();
    let pairs: Vec<usize> =
        (0..trace.records.len().saturating_sub(1)).filter(|&k| trace.records[k].topology.is_complete()).collect();
    if pairs.is_empty() {
        return Err(Error::NoCompletePhase);
    }
    let ratios: Vec<S> = pairs.iter().filter(|&&k| diam[k] > S::zero()).map(|&k| diam[k + 1] / diam[k]).collect();
    if ratios.is_empty() {
        return Ok(Contraction { beta: S::zero(), degenerate: true, steps_used: 0 });
    }
    Ok(Contraction {
        beta: ratios.iter().copied().fold(S::zero(), S::max),
        degenerate: false,
        steps_used: ratios.len(),
    })
}

fn energy_row<S: Scalar>(scenario: &Scenario<S>, step: usize, radii: &[S]) -> Vec<S> {
    if step == 0 && !scenario.accounting.include_initial {
        return vec![S::zero(); radii.len()];
    }
    let weight = if scenario.accounting.times_t { scenario.params.t } else { S::one() };
    radii.iter().map(|&d| weight * transmit_power(d, &scenario.power)).collect()
}

fn check_finite<S: Scalar>(step: usize, positions: &[Vec2<S>], radii: &[S]) -> Result<()> {
    for (agent, (p, d)) in positions.iter().zip(radii).enumerate() {
        if !p.is_finite() || !d.is_finite() {
            return Err(Error::NonFinite { step, agent });
        }
    }
    Ok(())
}

fn with_beacon<S: Scalar>(scenario: &Scenario<S>, mut d: RangeDecision<S>, outgoing_empty: bool) -> RangeDecision<S> {
    if outgoing_empty && d.reason == RangeReason::PreserveEdges && scenario.n_agents() > 1 {
        d.radius = scenario.idle_beacon_radius;
    }
    d
}

/// Next radius for the every-step policies.
fn synchronous_decision<S: Scalar>(
    scenario: &Scenario<S>,
    i: AgentId,
    positions: &[Vec2<S>],
    outgoing: &BTreeSet<AgentId>,
    u_i: &ControlInput<S>,
) -> RangeDecision<S> {
    let SimParams { t, gamma, n_agents } = scenario.params;
    let d = match &scenario.policy {
        RangePolicy::Preserving => preserving_range(i, positions, outgoing, u_i, gamma, t),
        RangePolicy::Modified => modified_range(i, positions, outgoing, u_i, gamma, t, n_agents),
        fixed @ RangePolicy::Fixed { .. } => fixed_range(fixed, scenario.initial_radii[i.0]),
        RangePolicy::Intermittent { .. } => unreachable!("intermittent runs use their own loop"),
    };
    with_beacon(scenario, d, outgoing.is_empty())
}

struct Stepper<'a, S> {
    scenario: &'a Scenario<S>,
    records: Vec<StepRecord<S>>,
    energy: EnergyLedger<S>,
}

impl<'a, S: Scalar> Stepper<'a, S> {
    /// Records step `k` and reports whether the run stops here.
    fn finish_step(&mut self, record: StepRecord<S>) -> Option<Termination> {
        let k = record.step;
        self.energy.push_row(energy_row(self.scenario, k, &record.radii));
        let diam = diameter(&record.positions);
        self.records.push(record);
        if self.scenario.stop_at_consensus && diam < self.scenario.consensus_tol {
            Some(Termination::Consensus)
        } else if k >= self.scenario.max_steps {
            Some(Termination::MaxSteps)
        } else {
            None
        }
    }
}

fn run_synchronous<S: Scalar>(scenario: &Scenario<S>, st: &mut Stepper<'_, S>) -> Result<Termination> {
    let n = scenario.n_agents();
    let SimParams { t, gamma, .. } = scenario.params;
    let mut positions = scenario.initial_positions.clone();
    let mut radii = scenario.initial_radii.clone();
    for k in 0.. {
        check_finite(k, &positions, &radii)?;
        let topology = snapshot(&positions, &radii);
        let controls: Vec<ControlInput<S>> =
            (0..n).map(|i| bounded_control(AgentId(i), &positions, &topology.in_of(i), gamma)).collect();
        let decisions: Vec<RangeDecision<S>> = (0..n)
            .map(|i| synchronous_decision(scenario, AgentId(i), &positions, &topology.out_of(i), &controls[i]))
            .collect();
        let next_positions =
            step_all(&positions, &controls.iter().map(|c| c.vector).collect::<Vec<_>>(), t).map_err(|e| match e {
                Error::NonFinite { agent, .. } => Error::NonFinite { step: k, agent },
                other => other,
            })?;
        let next_radii = decisions.iter().map(|d| d.radius).collect();
        let record = StepRecord {
            step: k,
            positions: std::mem::replace(&mut positions, next_positions),
            radii: std::mem::replace(&mut radii, next_radii),
            controls,
            topology,
            decisions,
            broadcasting: vec![true; n],
        };
        if let Some(stop) = st.finish_step(record) {
            return Ok(stop);
        }
    }
    unreachable!()
}

/// Agents transmit only in their scheduled slots. Between slots a receiver
/// keeps using the last position it heard from each sender.
fn run_intermittent<S: Scalar>(
    scenario: &Scenario<S>,
    schedule: &Schedule,
    st: &mut Stepper<'_, S>,
) -> Result<Termination> {
    let n = scenario.n_agents();
    let SimParams { t, gamma, .. } = scenario.params;
    let mut positions = scenario.initial_positions.clone();
    let mut pending = scenario.initial_radii.clone();
    // held[receiver][sender]
    let mut held: Vec<Vec<Option<Vec2<S>>>> = vec![vec![None; n]; n];
    for k in 0.. {
        let broadcasting: Vec<bool> = (0..n).map(|i| schedule.broadcasts_at(i, k)).collect();
        let radii: Vec<S> = (0..n).map(|i| if broadcasting[i] { pending[i] } else { S::zero() }).collect();
        check_finite(k, &positions, &radii)?;

        let mut outgoing = vec![BTreeSet::new(); n];
        for i in (0..n).filter(|&i| broadcasting[i]) {
            outgoing[i] = outgoing_neighbors(&positions, &radii, AgentId(i));
            for (j, row) in held.iter_mut().enumerate().filter(|&(j, _)| j != i) {
                row[i] = outgoing[i].contains(&AgentId(j)).then_some(positions[i]);
            }
        }
        let mut topology = TopologySnapshot::empty(n);
        for (j, row) in held.iter().enumerate() {
            for (i, h) in row.iter().enumerate() {
                if h.is_some() {
                    topology.insert(i, j);
                }
            }
        }
        let controls: Vec<ControlInput<S>> =
            (0..n).map(|j| bounded_control_from(positions[j], held[j].iter().flatten().copied(), gamma)).collect();
        let decisions: Vec<RangeDecision<S>> = (0..n)
            .map(|i| {
                if broadcasting[i] {
                    let d = intermittent_range(
                        AgentId(i),
                        &positions,
                        &outgoing[i],
                        &controls[i],
                        gamma,
                        t,
                        schedule.gap(i),
                    );
                    with_beacon(scenario, d, outgoing[i].is_empty())
                } else {
                    RangeDecision { radius: S::zero(), reason: RangeReason::IdleNoBroadcast }
                }
            })
            .collect();
        for (i, d) in decisions.iter().enumerate() {
            if broadcasting[i] {
                pending[i] = d.radius;
            }
        }
        let next_positions =
            step_all(&positions, &controls.iter().map(|c| c.vector).collect::<Vec<_>>(), t).map_err(|e| match e {
                Error::NonFinite { agent, .. } => Error::NonFinite { step: k, agent },
                other => other,
            })?;
        let record = StepRecord {
            step: k,
            positions: std::mem::replace(&mut positions, next_positions),
            radii,
            controls,
            topology,
            decisions,
            broadcasting,
        };
        if let Some(stop) = st.finish_step(record) {
            return Ok(stop);
        }
    }
    unreachable!()
}

/// Runs the scenario until consensus or `max_steps`.
pub fn run<S: Scalar>(scenario: &Scenario<S>) -> Result<SimulationTrace<S>> {
    scenario.validate()?;
    let n = scenario.n_agents();
    let mut st = Stepper { scenario, records: Vec::new(), energy: EnergyLedger::new(n) };
    let termination = match &scenario.policy {
        RangePolicy::Intermittent { schedule } => run_intermittent(scenario, schedule, &mut st)?,
        _ => run_synchronous(scenario, &mut st)?,
    };
    let steps_executed = st.records.len() - 1;
    info!(
        "{} run finished after {} steps ({:?}), team energy {}",
        scenario.policy.label(),
        steps_executed,
        termination,
        st.energy.team_total()
    );
    debug!("final positions {:?}", st.records.last().map(|r| &r.positions));
    Ok(SimulationTrace {
        scenario_hash: scenario.fingerprint(),
        policy_label: scenario.policy.label(),
        n_agents: n,
        sampling_period: scenario.params.t,
        records: st.records,
        energy: st.energy,
        termination,
        steps_executed,
    })
}

/// Random scenario whose initial topology has a directed spanning tree.
///
/// Positions are uniform on a 10 m square, radii uniform on `[1, 6]` m, and
/// `T = 0.9 / n`. Draws are repeated until the topology qualifies.
pub fn generate_scenario(n_agents: usize, seed: u64) -> Result<Scenario<f64>> {
    const BUDGET: usize = 10_000;
    if n_agents < 2 {
        return Err(Error::Validation("generated scenarios need at least 2 agents".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..BUDGET {
        let positions: Vec<Vec2<f64>> =
            (0..n_agents).map(|_| Vec2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
        let radii: Vec<f64> = (0..n_agents).map(|_| rng.gen_range(1.0..6.0)).collect();
        if has_directed_spanning_tree(&snapshot(&positions, &radii)) {
            return Ok(Scenario {
                initial_positions: positions,
                initial_radii: radii,
                params: SimParams { t: 0.9 / n_agents as f64, gamma: 1.0, n_agents },
                policy: RangePolicy::Modified,
                power: PowerModel { epsilon: 1.0, alpha: 2.0 },
                accounting: EnergyAccounting::default(),
                max_steps: 100_000,
                consensus_tol: 1e-6,
                stop_at_consensus: true,
                idle_beacon_radius: 0.0,
                rng_seed: Some(seed),
            });
        }
    }
    Err(Error::RejectionBudget { attempts: BUDGET })
}

/// Fixed baseline with every agent keeping its initial radius.
pub fn fixed_initial<S: Scalar>() -> RangePolicy<S> {
    RangePolicy::Fixed { delta: FixedDelta::PerAgentInitial }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(policy: RangePolicy<f64>) -> Scenario<f64> {
        Scenario::four_agent_reference(policy)
    }

    #[test]
    fn diameter_examples() {
        let s = reference(RangePolicy::Modified);
        // r1-r3: sqrt(1.7^2 + 3.2^2)
        assert!((diameter(&s.initial_positions) - 13.13f64.sqrt()).abs() < 1e-12);
        assert_eq!(diameter(&[Vec2::new(1.0, 1.0)]), 0.0);
        assert_eq!(diameter(&[Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)]), 5.0);
    }

    #[test]
    fn reference_first_step() {
        let trace = run(&reference(RangePolicy::Modified)).unwrap();
        let r0 = &trace.records[0];
        assert_eq!(r0.topology.to_string(), "{1->2, 1->4, 2->1, 3->4, 4->3}");
        let u1 = r0.controls[0].vector;
        assert!((u1.x + 0.6 / 1.8f64.sqrt()).abs() < 1e-12 && (u1.y - 1.2 / 1.8f64.sqrt()).abs() < 1e-12);
        assert!((r0.decisions[0].radius - (11.54f64.sqrt() + 0.2)).abs() < 1e-12);
        let p1 = trace.records[1].positions[0];
        assert!((p1.x - 1.9553).abs() < 1e-4 && (p1.y - 2.0894).abs() < 1e-4);
        assert_eq!(trace.records[1].radii[0], r0.decisions[0].radius);
        assert!(trace.energy.step(0).iter().all(|&e| e == 0.0));
    }

    #[test]
    fn reference_reaches_consensus() {
        let trace = run(&reference(RangePolicy::Modified)).unwrap();
        assert_eq!(trace.termination, Termination::Consensus);
        assert!(trace.final_diameter() < 1e-6);
        assert_eq!(trace.records.len(), trace.steps_executed + 1);
        assert!(trace.spanning_tree_at_start());
    }

    #[test]
    fn single_agent_stops_immediately() {
        let s = Scenario {
            initial_positions: vec![Vec2::new(1.0, 2.0)],
            initial_radii: vec![3.0],
            params: SimParams { t: 0.5, gamma: 1.0, n_agents: 1 },
            ..reference(RangePolicy::Modified)
        };
        let trace = run(&s).unwrap();
        assert_eq!(trace.steps_executed, 0);
        assert_eq!(trace.termination, Termination::Consensus);
        assert_eq!(trace.energy.team_total(), 0.0);
    }

    #[test]
    fn coincident_start_stops_immediately() {
        let mut s = reference(RangePolicy::Preserving);
        s.initial_positions = vec![Vec2::new(1.0, 1.0); 4];
        let trace = run(&s).unwrap();
        assert_eq!(trace.steps_executed, 0);
        assert_eq!(trace.final_diameter(), 0.0);
    }

    #[test]
    fn max_steps_is_reported() {
        let mut s = reference(RangePolicy::Modified);
        s.max_steps = 5;
        let trace = run(&s).unwrap();
        assert_eq!(trace.termination, Termination::MaxSteps);
        assert_eq!(trace.steps_executed, 5);
        assert_eq!(trace.energy.steps(), 6);
    }

    #[test]
    fn validation_errors() {
        let mut s = reference(RangePolicy::Modified);
        s.params.t = 0.3;
        assert!(run(&s).unwrap_err().to_string().contains("T must be < 1/N"));
        let mut s = reference(RangePolicy::Modified);
        s.initial_radii[2] = -1.0;
        assert!(run(&s).is_err());
        let mut s = reference(RangePolicy::Modified);
        s.max_steps = 0;
        assert!(run(&s).is_err());
        let mut s = reference(RangePolicy::Modified);
        s.consensus_tol = 0.0;
        assert!(run(&s).is_err());
        let mut s = reference(RangePolicy::Modified);
        s.initial_radii.pop();
        assert!(run(&s).is_err());
    }

    #[test]
    fn two_agent_contraction() {
        let s = Scenario {
            initial_positions: vec![Vec2::new(0.0, 0.0), Vec2::new(0.6, 0.3)],
            initial_radii: vec![1.0, 1.0],
            params: SimParams { t: 0.1, gamma: 1.0, n_agents: 2 },
            max_steps: 40,
            stop_at_consensus: false,
            ..reference(RangePolicy::Modified)
        };
        let c = contraction_estimate(&run(&s).unwrap()).unwrap();
        assert!(!c.degenerate);
        assert!((c.beta - 0.8).abs() < 1e-12, "beta {}", c.beta);
    }

    #[test]
    fn contraction_edge_cases() {
        let mut s = reference(RangePolicy::Fixed { delta: FixedDelta::Common(0.1) });
        s.max_steps = 3;
        assert!(matches!(contraction_estimate(&run(&s).unwrap()), Err(Error::NoCompletePhase)));

        let mut s = reference(RangePolicy::Modified);
        s.initial_positions = vec![Vec2::new(1.0, 1.0); 4];
        s.stop_at_consensus = false;
        s.max_steps = 3;
        let c = contraction_estimate(&run(&s).unwrap()).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.beta, 0.0);
    }

    #[test]
    fn generator_postconditions() {
        let s = generate_scenario(6, 7).unwrap();
        assert!(s.validate().is_ok());
        assert!(has_directed_spanning_tree(&snapshot(&s.initial_positions, &s.initial_radii)));
        assert_eq!(generate_scenario(4, 42).unwrap(), generate_scenario(4, 42).unwrap());
        assert!(generate_scenario(1, 3).is_err());
    }

    #[test]
    fn f32_run_converges() {
        let mut s = Scenario::<f32>::four_agent_reference(RangePolicy::Modified);
        s.consensus_tol = 1e-3;
        let trace = run(&s).unwrap();
        assert_eq!(trace.termination, Termination::Consensus);
    }

    #[test]
    fn beacon_radius_applies_to_idle_agents() {
        // agent 2 covers nobody; with a beacon it transmits anyway
        let mut s = reference(RangePolicy::Preserving);
        s.initial_positions = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
        s.initial_radii = vec![1.5, 0.5];
        s.params.n_agents = 2;
        s.max_steps = 2;
        s.idle_beacon_radius = 0.25;
        let trace = run(&s).unwrap();
        assert_eq!(trace.records[1].radii[1], 0.25);
        s.idle_beacon_radius = 0.0;
        let trace = run(&s).unwrap();
        assert_eq!(trace.records[1].radii[1], 0.0);
    }

    #[test]
    fn intermittent_silent_agents_hold_links() {
        let schedule = Schedule::uniform(4, 3).unwrap();
        let mut s = reference(RangePolicy::Intermittent { schedule });
        s.max_steps = 7;
        let trace = run(&s).unwrap();
        let r1 = &trace.records[1];
        assert!(r1.radii.iter().all(|&d| d == 0.0));
        assert!(r1.decisions.iter().all(|d| d.reason == RangeReason::IdleNoBroadcast));
        assert_eq!(r1.topology, trace.records[0].topology);
        assert_eq!(trace.records[3].radii[0], trace.records[0].decisions[0].radius);
        assert!(trace.energy.step(1).iter().all(|&e| e == 0.0));
    }
}
