//! Scenario files (JSON), traces (CSV), run summaries and comparison reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::SimParams;
use crate::energy::PowerModel;
use crate::engine::{
    contraction_estimate, diameter, Contraction, EnergyAccounting, Scenario, SimulationTrace, Termination,
};
use crate::error::{Error, Result};
use crate::oracle::{RecordedRow, RecordedTrace};
use crate::range_policy::{FixedDelta, RangePolicy, Schedule, Slot};
use crate::vec2::Vec2;

pub const TRACE_HEADER: [&str; 10] = ["step", "agent", "x", "y", "ux", "uy", "radius", "step_energy", "n_out", "n_in"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub position: [f64; 2],
    pub radius: f64,
}

fn default_gamma() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsEntry {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Preserving,
    Modified,
    Intermittent,
    Fixed,
}

/// Either one slot shared by all agents or one slot per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleEntry {
    Shared(Slot),
    PerAgent(Vec<Slot>),
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn is_false(v: &bool) -> bool {
    !*v
}

fn is_true(v: &bool) -> bool {
    *v
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub kind: PolicyKind,
    /// Common fixed radius; omitted means every agent keeps its initial radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleEntry>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub idle_beacon_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerEntry {
    pub epsilon: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub times_t: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub include_initial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub max_steps: usize,
    pub consensus_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub stop_at_consensus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub agents: Vec<AgentEntry>,
    pub params: ParamsEntry,
    pub policy: PolicyEntry,
    pub power: PowerEntry,
    pub run: RunEntry,
}

impl PolicyEntry {
    pub fn to_policy(&self, n_agents: usize) -> Result<RangePolicy<f64>> {
        if self.delta.is_some() && self.kind != PolicyKind::Fixed {
            return Err(Error::Validation("`delta` only applies to the fixed policy".into()));
        }
        if self.schedule.is_some() && self.kind != PolicyKind::Intermittent {
            return Err(Error::Validation("`schedule` only applies to the intermittent policy".into()));
        }
        Ok(match self.kind {
            PolicyKind::Preserving => RangePolicy::Preserving,
            PolicyKind::Modified => RangePolicy::Modified,
            PolicyKind::Fixed => {
                RangePolicy::Fixed { delta: self.delta.map_or(FixedDelta::PerAgentInitial, FixedDelta::Common) }
            }
            PolicyKind::Intermittent => {
                let slots = match &self.schedule {
                    Some(ScheduleEntry::Shared(slot)) => vec![*slot; n_agents],
                    Some(ScheduleEntry::PerAgent(slots)) => slots.clone(),
                    None => return Err(Error::Validation("intermittent policy needs a `schedule`".into())),
                };
                RangePolicy::Intermittent { schedule: Schedule::new(slots)? }
            }
        })
    }

    pub fn from_policy(policy: &RangePolicy<f64>, idle_beacon_radius: f64) -> Self {
        let (kind, delta, schedule) = match policy {
            RangePolicy::Preserving => (PolicyKind::Preserving, None, None),
            RangePolicy::Modified => (PolicyKind::Modified, None, None),
            RangePolicy::Fixed { delta: FixedDelta::Common(d) } => (PolicyKind::Fixed, Some(*d), None),
            RangePolicy::Fixed { delta: FixedDelta::PerAgentInitial } => (PolicyKind::Fixed, None, None),
            RangePolicy::Intermittent { schedule } => {
                (PolicyKind::Intermittent, None, Some(ScheduleEntry::PerAgent(schedule.slots().to_vec())))
            }
        };
        PolicyEntry { kind, delta, schedule, idle_beacon_radius }
    }
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<Scenario<f64>> {
        let n = self.agents.len();
        let scenario = Scenario {
            initial_positions: self.agents.iter().map(|a| Vec2::from(a.position)).collect(),
            initial_radii: self.agents.iter().map(|a| a.radius).collect(),
            params: SimParams { t: self.params.t, gamma: self.params.gamma, n_agents: n },
            policy: self.policy.to_policy(n)?,
            power: PowerModel { epsilon: self.power.epsilon, alpha: self.power.alpha },
            accounting: EnergyAccounting { times_t: self.power.times_t, include_initial: self.power.include_initial },
            max_steps: self.run.max_steps,
            consensus_tol: self.run.consensus_tol,
            stop_at_consensus: self.run.stop_at_consensus,
            idle_beacon_radius: self.policy.idle_beacon_radius,
            rng_seed: self.run.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_scenario(s: &Scenario<f64>) -> Self {
        ScenarioFile {
            agents: s
                .initial_positions
                .iter()
                .zip(&s.initial_radii)
                .map(|(p, &radius)| AgentEntry { position: [p.x, p.y], radius })
                .collect(),
            params: ParamsEntry { t: s.params.t, gamma: s.params.gamma },
            policy: PolicyEntry::from_policy(&s.policy, s.idle_beacon_radius),
            power: PowerEntry {
                epsilon: s.power.epsilon,
                alpha: s.power.alpha,
                times_t: s.accounting.times_t,
                include_initial: s.accounting.include_initial,
            },
            run: RunEntry {
                max_steps: s.max_steps,
                consensus_tol: s.consensus_tol,
                seed: s.rng_seed,
                stop_at_consensus: s.stop_at_consensus,
            },
        }
    }
}

pub fn parse_scenario(json: &str) -> Result<Scenario<f64>> {
    let file: ScenarioFile = serde_json::from_str(json)?;
    file.to_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario<f64>> {
    parse_scenario(&fs::read_to_string(path)?)
}

pub fn scenario_json(s: &Scenario<f64>) -> Result<String> {
    let mut out = serde_json::to_string_pretty(&ScenarioFile::from_scenario(s))?;
    out.push('\n');
    Ok(out)
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".into(),
    });
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per agent per recorded step; agents are numbered from 1.
pub fn trace_csv(trace: &SimulationTrace<f64>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER)?;
    let rec = RecordedTrace::from_trace(trace);
    for (k, rows) in rec.steps.iter().enumerate() {
        for (i, r) in rows.iter().enumerate() {
            w.write_record([
                k.to_string(),
                (i + 1).to_string(),
                fmt_f64(r.position.x),
                fmt_f64(r.position.y),
                fmt_f64(r.control.x),
                fmt_f64(r.control.y),
                fmt_f64(r.radius),
                fmt_f64(r.step_energy),
                r.n_out.to_string(),
                r.n_in.to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    rec.get(idx)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Trace(format!("line {line}: bad `{}` value", TRACE_HEADER[idx])))
}

pub fn parse_trace_csv(data: &[u8]) -> Result<RecordedTrace<f64>> {
    let mut r = csv::Reader::from_reader(data);
    let header = r.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Trace(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut steps: Vec<Vec<RecordedRow<f64>>> = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let step: usize = field(&rec, 0, line)?;
        let agent: usize = field(&rec, 1, line)?;
        if step == steps.len() {
            steps.push(Vec::new());
        } else if step + 1 != steps.len() {
            return Err(Error::Trace(format!("line {line}: step column not monotone")));
        }
        let rows = steps.last_mut().unwrap();
        if agent != rows.len() + 1 {
            return Err(Error::Trace(format!("line {line}: expected agent {}", rows.len() + 1)));
        }
        rows.push(RecordedRow {
            position: Vec2::new(field(&rec, 2, line)?, field(&rec, 3, line)?),
            control: Vec2::new(field(&rec, 4, line)?, field(&rec, 5, line)?),
            radius: field(&rec, 6, line)?,
            step_energy: field(&rec, 7, line)?,
            n_out: field(&rec, 8, line)?,
            n_in: field(&rec, 9, line)?,
        });
    }
    let n_agents = steps.first().map_or(0, |s| s.len());
    if n_agents == 0 || steps.iter().any(|s| s.len() != n_agents) {
        return Err(Error::Trace("every step must list the same agents".into()));
    }
    Ok(RecordedTrace { n_agents, steps })
}

pub fn read_trace_csv(path: &Path) -> Result<RecordedTrace<f64>> {
    parse_trace_csv(&fs::read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionEntry {
    pub beta: f64,
    pub degenerate: bool,
    pub steps_used: usize,
}

impl From<Contraction<f64>> for ContractionEntry {
    fn from(c: Contraction<f64>) -> Self {
        ContractionEntry { beta: c.beta, degenerate: c.degenerate, steps_used: c.steps_used }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub policy: String,
    pub scenario_hash: String,
    pub n_agents: usize,
    pub termination: Termination,
    pub consensus_reached: bool,
    pub steps_executed: usize,
    pub initial_diameter: f64,
    pub final_diameter: f64,
    pub spanning_tree_at_start: bool,
    pub team_energy: f64,
    pub per_agent_energy: Vec<f64>,
    /// First step from which the topology stays complete.
    pub complete_phase_start: Option<usize>,
    /// Team energy charged from `complete_phase_start` onward.
    pub energy_from_complete_phase: Option<f64>,
    pub contraction: Option<ContractionEntry>,
}

impl Summary {
    pub fn from_trace(trace: &SimulationTrace<f64>, consensus_tol: f64) -> Self {
        let start = trace.complete_phase_start();
        let final_diameter = trace.final_diameter();
        Summary {
            policy: trace.policy_label.clone(),
            scenario_hash: trace.scenario_hash.clone(),
            n_agents: trace.n_agents,
            termination: trace.termination,
            consensus_reached: final_diameter < consensus_tol,
            steps_executed: trace.steps_executed,
            initial_diameter: diameter(&trace.records[0].positions),
            final_diameter,
            spanning_tree_at_start: trace.spanning_tree_at_start(),
            team_energy: trace.energy.team_total(),
            per_agent_energy: trace.energy.per_agent_total().to_vec(),
            complete_phase_start: start,
            energy_from_complete_phase: start.map(|s| trace.energy.window_total(s..trace.energy.steps())),
            contraction: contraction_estimate(trace).ok().map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub policy: String,
    pub team_energy: f64,
    pub per_agent_energy: Vec<f64>,
    pub final_diameter: f64,
    pub steps_executed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRatio {
    pub numerator: String,
    pub denominator: String,
    /// `None` when the denominator energy is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario_hash: String,
    pub horizon_steps: usize,
    pub policies: Vec<PolicyOutcome>,
    pub ratios: Vec<EnergyRatio>,
}

pub fn to_json_pretty<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;

    const FOUR_AGENTS: &str = include_str!("../scenarios/paper_sec5.json");

    #[test]
    fn bundled_scenario_loads() {
        let s = parse_scenario(FOUR_AGENTS).unwrap();
        assert_eq!(s, Scenario::four_agent_reference(RangePolicy::Modified));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = FOUR_AGENTS.replace("\"gamma\"", "\"gama\"");
        assert!(parse_scenario(&bad).is_err());
        let bad = FOUR_AGENTS.replacen("\"run\": {", "\"run\": { \"extra\": 1,", 1);
        assert!(parse_scenario(&bad).unwrap_err().is_validation());
    }

    #[test]
    fn sampling_constraint_message() {
        let bad = FOUR_AGENTS.replace("\"T\": 0.1", "\"T\": 0.3");
        let err = parse_scenario(&bad).unwrap_err();
        assert!(err.to_string().contains("T must be < 1/N"), "{err}");
        assert!(err.is_validation());
    }

    #[test]
    fn gamma_defaults_to_one() {
        let s = parse_scenario(&FOUR_AGENTS.replace(",\n    \"gamma\": 1.0", "")).unwrap();
        assert_eq!(s.params.gamma, 1.0);
    }

    #[test]
    fn policy_entries() {
        let n = 3;
        let fixed = PolicyEntry { kind: PolicyKind::Fixed, delta: Some(2.0), schedule: None, idle_beacon_radius: 0.0 };
        assert_eq!(fixed.to_policy(n).unwrap(), RangePolicy::Fixed { delta: FixedDelta::Common(2.0) });
        let shared = PolicyEntry {
            kind: PolicyKind::Intermittent,
            delta: None,
            schedule: Some(ScheduleEntry::Shared(Slot { period: 2, offset: 0 })),
            idle_beacon_radius: 0.0,
        };
        assert_eq!(
            shared.to_policy(n).unwrap(),
            RangePolicy::Intermittent { schedule: Schedule::uniform(3, 2).unwrap() }
        );
        let stray =
            PolicyEntry { kind: PolicyKind::Modified, delta: Some(1.0), schedule: None, idle_beacon_radius: 0.0 };
        assert!(stray.to_policy(n).is_err());
        let missing =
            PolicyEntry { kind: PolicyKind::Intermittent, delta: None, schedule: None, idle_beacon_radius: 0.0 };
        assert!(missing.to_policy(n).is_err());
        let json = r#"{"kind": "intermittent", "schedule": [{"period": 1}, {"period": 3, "offset": 1}]}"#;
        let entry: PolicyEntry = serde_json::from_str(json).unwrap();
        assert!(entry.to_policy(2).is_ok());
    }

    #[test]
    fn trace_csv_shape_and_parse() {
        let mut s = Scenario::four_agent_reference(RangePolicy::Modified);
        s.max_steps = 20;
        let trace = run(&s).unwrap();
        let bytes = trace_csv(&trace).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "step,agent,x,y,ux,uy,radius,step_energy,n_out,n_in");
        assert_eq!(lines.count(), 21 * 4);
        let parsed = parse_trace_csv(&bytes).unwrap();
        assert_eq!(parsed, RecordedTrace::from_trace(&trace));
    }

    #[test]
    fn trace_csv_rejects_garbage() {
        assert!(parse_trace_csv(b"a,b\n1,2\n").is_err());
        let shuffled = "step,agent,x,y,ux,uy,radius,step_energy,n_out,n_in\n1,1,0,0,0,0,0,0,0,0\n0,1,0,0,0,0,0,0,0,0\n";
        assert!(parse_trace_csv(shuffled.as_bytes()).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
