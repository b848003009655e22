//! Brute-force reference computations used to cross-check the engine.
//!
//! Nothing here calls into the graph, dynamics or range-policy modules; the
//! formulas are re-derived inline so that agreement means something.

use std::collections::BTreeSet;
use std::fmt;

use crate::engine::{Scenario, SimulationTrace};
use crate::graph::{AgentId, TopologySnapshot};
use crate::range_policy::{FixedDelta, RangePolicy};
use crate::scalar::Scalar;
use crate::vec2::Vec2;

/// Agents reachable from `root` along directed edges, `root` included.
/// Naive fixpoint iteration over the edge list.
pub fn reachable_set(topo: &TopologySnapshot, root: AgentId) -> BTreeSet<AgentId> {
    assert!(root.0 < topo.n_agents(), "root out of range");
    let mut reached = BTreeSet::from([root]);
    loop {
        let before = reached.len();
        for &(a, b) in topo.edges() {
            if reached.contains(&a) {
                reached.insert(b);
            }
        }
        if reached.len() == before {
            return reached;
        }
    }
}

/// Spanning-tree test by transitive closure from every root.
pub fn spanning_tree_by_closure(topo: &TopologySnapshot) -> bool {
    (0..topo.n_agents()).any(|r| reachable_set(topo, AgentId(r)).len() == topo.n_agents())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullQuery<S> {
    pub point: Vec2<S>,
    pub vertices: Vec<Vec2<S>>,
}

fn orient<S: Scalar>(a: Vec2<S>, b: Vec2<S>, c: Vec2<S>) -> S {
    (b - a).cross(c - a)
}

/// Monotone-chain hull, counter-clockwise, collinear points dropped.
fn hull<S: Scalar>(points: &[Vec2<S>]) -> Vec<Vec2<S>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec2<S>> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= S::zero() {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2<S>> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= S::zero() {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance<S: Scalar>(p: Vec2<S>, a: Vec2<S>, b: Vec2<S>) -> S {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == S::zero() {
        return p.dist(a);
    }
    let s = ((p - a).dot(ab) / len2).max(S::zero()).min(S::one());
    p.dist(a + ab.scale(s))
}

/// Whether `point` lies within `slack` of the convex hull of `vertices`.
pub fn hull_contains<S: Scalar>(query: &HullQuery<S>, slack: S) -> bool {
    assert!(slack >= S::zero());
    let h = hull(&query.vertices);
    let p = query.point;
    match h.len() {
        0 => false,
        1 => p.dist(h[0]) <= slack,
        2 => segment_distance(p, h[0], h[1]) <= slack,
        m => {
            let inside = (0..m).all(|e| orient(h[e], h[(e + 1) % m], p) >= S::zero());
            inside || (0..m).any(|e| segment_distance(p, h[e], h[(e + 1) % m]) <= slack)
        }
    }
}

/// One agent's recorded data at one step, as stored in a trace file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordedRow<S> {
    pub position: Vec2<S>,
    pub control: Vec2<S>,
    pub radius: S,
    pub step_energy: S,
    pub n_out: usize,
    pub n_in: usize,
}

/// Trace reduced to the per-agent rows of the CSV format.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedTrace<S> {
    pub n_agents: usize,
    pub steps: Vec<Vec<RecordedRow<S>>>,
}

impl<S: Scalar> RecordedTrace<S> {
    pub fn from_trace(trace: &SimulationTrace<S>) -> Self {
        let steps = trace
            .records
            .iter()
            .enumerate()
            .map(|(k, r)| {
                (0..trace.n_agents)
                    .map(|i| RecordedRow {
                        position: r.positions[i],
                        control: r.controls[i].vector,
                        radius: r.radii[i],
                        step_energy: trace.energy.step(k)[i],
                        n_out: r.topology.out_degree(i),
                        n_in: r.topology.in_degree(i),
                    })
                    .collect()
            })
            .collect();
        RecordedTrace { n_agents: trace.n_agents, steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub step: usize,
    pub agent: usize,
    pub field: &'static str,
    pub recorded: f64,
    pub recomputed: f64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {} agent {} field {}: recorded {:e}, recomputed {:e}",
            self.step,
            self.agent + 1,
            self.field,
            self.recorded,
            self.recomputed
        )
    }
}

pub const REPLAY_TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REPLAY_TOL * 1f64.max(a.abs()).max(b.abs())
}

fn is_broadcast<S>(policy: &RangePolicy<S>, i: usize, k: usize) -> bool {
    match policy {
        RangePolicy::Intermittent { schedule } => schedule.broadcasts_at(i, k),
        _ => true,
    }
}

/// Link `i -> j` at step `k` and the position of `i` that `j` holds.
fn link<S: Scalar>(scenario: &Scenario<S>, rec: &RecordedTrace<S>, i: usize, j: usize, k: usize) -> Option<Vec2<S>> {
    if i == j {
        return None;
    }
    let kb = match &scenario.policy {
        RangePolicy::Intermittent { schedule } => schedule.last_broadcast(i, k)?,
        _ => k,
    };
    let (ri, rj) = (rec.steps[kb][i].position, rec.steps[kb][j].position);
    let dx = ri.x - rj.x;
    let dy = ri.y - rj.y;
    ((dx * dx + dy * dy).sqrt() <= rec.steps[kb][i].radius).then_some(ri)
}

/// Recomputes everything derived at step `k` from the recorded positions and
/// radii, and checks the transition into step `k + 1` when it exists.
pub fn replay_step<S: Scalar>(scenario: &Scenario<S>, rec: &RecordedTrace<S>, k: usize) -> Result<(), Vec<Mismatch>> {
    assert!(k < rec.len(), "step {k} beyond trace of {} steps", rec.len());
    let n = rec.n_agents;
    let t = scenario.params.t;
    let gamma = scenario.params.gamma;
    let now = &rec.steps[k];
    let mut bad = Vec::new();
    let mut check = |agent: usize, step: usize, field: &'static str, recorded: S, recomputed: S| {
        if !close(recorded.as_f64(), recomputed.as_f64()) {
            bad.push(Mismatch { step, agent, field, recorded: recorded.as_f64(), recomputed: recomputed.as_f64() });
        }
    };

    let links: Vec<Vec<Option<Vec2<S>>>> =
        (0..n).map(|i| (0..n).map(|j| link(scenario, rec, i, j, k)).collect()).collect();
    let mut controls = Vec::with_capacity(n);
    for j in 0..n {
        let n_out = (0..n).filter(|&o| links[j][o].is_some()).count();
        let n_in = (0..n).filter(|&o| links[o][j].is_some()).count();
        check(j, k, "n_out", S::from_usize_lossy(now[j].n_out), S::from_usize_lossy(n_out));
        check(j, k, "n_in", S::from_usize_lossy(now[j].n_in), S::from_usize_lossy(n_in));

        let own = now[j].position;
        let (mut zx, mut zy) = (S::zero(), S::zero());
        for row in links.iter() {
            if let Some(h) = row[j] {
                zx = zx + (own.x - h.x);
                zy = zy + (own.y - h.y);
            }
        }
        let zn = zx.hypot(zy);
        let c = if zn > gamma { gamma / zn } else { S::one() };
        let u = Vec2::new(-(zx * c), -(zy * c));
        check(j, k, "ux", now[j].control.x, u.x);
        check(j, k, "uy", now[j].control.y, u.y);
        controls.push(u);

        let d = now[j].radius;
        if !is_broadcast(&scenario.policy, j, k) {
            check(j, k, "radius", d, S::zero());
        }
        let charged = k > 0 || scenario.accounting.include_initial;
        let weight = if scenario.accounting.times_t { t } else { S::one() };
        let energy = if charged { weight * scenario.power.epsilon * d.powf(scenario.power.alpha) } else { S::zero() };
        check(j, k, "step_energy", now[j].step_energy, energy);
    }

    if k + 1 < rec.len() {
        let next = &rec.steps[k + 1];
        for i in 0..n {
            let p = now[i].position;
            check(i, k + 1, "x", next[i].position.x, p.x + t * now[i].control.x);
            check(i, k + 1, "y", next[i].position.y, p.y + t * now[i].control.y);

            let out: Vec<usize> = (0..n).filter(|&j| links[i][j].is_some()).collect();
            let dist = |j: usize| now[i].position.dist(now[j].position);
            let far_out = out.iter().map(|&j| dist(j)).fold(S::zero(), S::max);
            let unorm = controls[i].norm();
            let budget = |gap: usize| {
                if out.is_empty() {
                    if n > 1 {
                        scenario.idle_beacon_radius
                    } else {
                        S::zero()
                    }
                } else {
                    far_out + S::from_usize_lossy(gap) * (unorm + gamma) * t
                }
            };
            let expected = match &scenario.policy {
                RangePolicy::Preserving => Some((k + 1, budget(1))),
                RangePolicy::Modified => {
                    if out.len() + 1 == n {
                        let far_all = (0..n).map(dist).fold(S::zero(), S::max);
                        Some((k + 1, far_all + far_all))
                    } else {
                        Some((k + 1, budget(1)))
                    }
                }
                RangePolicy::Fixed { delta: FixedDelta::Common(d) } => Some((k + 1, *d)),
                RangePolicy::Fixed { delta: FixedDelta::PerAgentInitial } => Some((k + 1, scenario.initial_radii[i])),
                RangePolicy::Intermittent { schedule } => schedule
                    .broadcasts_at(i, k)
                    .then(|| (k + schedule.gap(i), budget(schedule.gap(i))))
                    .filter(|(at, _)| *at < rec.len()),
            };
            if let Some((at, radius)) = expected {
                check(i, at, "radius", rec.steps[at][i].radius, radius);
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

/// Replays every step; returns all mismatches found.
pub fn verify_trace<S: Scalar>(scenario: &Scenario<S>, rec: &RecordedTrace<S>) -> Vec<Mismatch> {
    // initial radii come from the scenario, not from any earlier step
    let mut bad: Vec<Mismatch> = match &scenario.policy {
        RangePolicy::Intermittent { schedule } => (0..rec.n_agents)
            .filter_map(|i| {
                let first = schedule.slots()[i].offset;
                (first < rec.len()).then_some((i, first))
            })
            .filter(|&(i, first)| !close(rec.steps[first][i].radius.as_f64(), scenario.initial_radii[i].as_f64()))
            .map(|(i, first)| Mismatch {
                step: first,
                agent: i,
                field: "radius",
                recorded: rec.steps[first][i].radius.as_f64(),
                recomputed: scenario.initial_radii[i].as_f64(),
            })
            .collect(),
        _ => (0..rec.n_agents)
            .filter(|&i| !close(rec.steps[0][i].radius.as_f64(), scenario.initial_radii[i].as_f64()))
            .map(|i| Mismatch {
                step: 0,
                agent: i,
                field: "radius",
                recorded: rec.steps[0][i].radius.as_f64(),
                recomputed: scenario.initial_radii[i].as_f64(),
            })
            .collect(),
    };
    for k in 0..rec.len() {
        if let Err(m) = replay_step(scenario, rec, k) {
            bad.extend(m);
        }
    }
    bad
}
